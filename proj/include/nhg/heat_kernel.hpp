#pragma once

#include <span>
#include <vector>

#include "nhg/group.hpp"
#include "nhg/report.hpp"

namespace nhg {

// The kernel is evaluated on the horizontal line Im(lambda) = sigma through the
// saddle of the lambda-integrand, where the integrand is non-oscillatory near its
// peak.  Values are carried in log form so large distances do not underflow.

struct QuadratureSpec {
  /// Relative tolerance, measured against the L1 norm of the integrand.
  double rel_tol = 1e-11;
  /// Largest lambda the march may reach.
  double max_lambda = 1e4;
  int panel_budget = 6000;
  /// Panels per period of the residual oscillation exp(i s t / 4h).
  double panels_per_period = 8.0;
  /// Past this many horizontal panels the tail is taken along a ray tilted into the
  /// upper half plane, where exp(i lambda t) decays.  Zero forces the ray whenever t != 0.
  double ray_threshold = 60.0;
};

struct KernelValue {
  double value = 0.0;
  /// Absolute error estimate.
  double error = 0.0;
  double log_value = 0.0;
  double rel_error = 0.0;
};

/// p_h = exp(log_scale) * m0; the remaining moments feed the derivatives.
struct KernelMoments {
  double log_scale = 0.0;
  double m0 = 0.0;
  /// int Re(G a_j lambda coth(a_j lambda)) per block.
  std::vector<double> block;
  /// int Re(G i lambda), for t >= 0; the caller flips the sign for t < 0.
  double mt = 0.0;
  double rel_error = 0.0;
  double sigma = 0.0;
  int panels = 0;
  bool ray = false;
};

/// Saddle height sigma in [0, pi) of the lambda-integrand on the imaginary axis, and pi - sigma.
std::pair<double, double> kernel_saddle(const GroupParams& params, double h, std::span<const double> rho, double abs_t);

KernelMoments kernel_moments(const GroupParams& params, double h, const GroupPoint& g,
                             const QuadratureSpec& spec = {}, bool derivatives = true);

/// Throws ConditioningError when the value falls below 1e-300.
KernelValue kernel(const GroupParams& params, double h, const GroupPoint& g, const QuadratureSpec& spec = {});
/// log p_h(g); no positivity floor.
KernelValue log_kernel(const GroupParams& params, double h, const GroupPoint& g, const QuadratureSpec& spec = {});

/// Euclidean gradient of log p_h (d/dx_{1,1}, d/dy_{1,1}, ..., d/dt).
std::vector<double> log_kernel_euclidean_gradient(const GroupParams& params, double h, const GroupPoint& g,
                                                  const QuadratureSpec& spec = {});
/// (X_{1,1} ln p_h, Y_{1,1} ln p_h, ...).
std::vector<double> log_kernel_left_gradient(const GroupParams& params, double h, const GroupPoint& g,
                                             const QuadratureSpec& spec = {});
std::vector<double> log_kernel_right_gradient(const GroupParams& params, double h, const GroupPoint& g,
                                              const QuadratureSpec& spec = {});
double log_kernel_t_derivative(const GroupParams& params, double h, const GroupPoint& g,
                               const QuadratureSpec& spec = {});

/// Fast p_h on fixed real-axis nodes for |t| <= t_max, |z|^2 <= rho_max.  Accuracy is
/// absolute (relative to p_h(0)); meant for convolution weights, not tails.
class KernelTable {
 public:
  KernelTable(const GroupParams& params, double h, double t_max, double rho_max, double rel_tol = 1e-12);

  double operator()(std::span<const double> g) const;
  /// Euclidean gradient of p_h at g; returns p_h(g).
  double gradient(std::span<const double> g, std::span<double> grad) const;
  /// Points are row-major dim-vectors.
  void evaluate_serial(std::span<const double> points, std::span<double> out) const;
  void evaluate_parallel(std::span<const double> points, std::span<double> out) const;

  double h() const { return h_; }
  double t_max() const { return t_max_; }
  std::size_t nodes() const { return freq_.size(); }

 private:
  GroupParams params_;
  double h_;
  double t_max_;
  std::vector<double> weight_;
  std::vector<double> freq_;
  std::vector<double> coth_;  ///< node-major, one entry per block
};

/// |h^{n+1} p_h(z,t) - p(z/sqrt h, t/h)| / p(z/sqrt h, t/h).
VerificationReport check_scaling(const GroupParams& params, double h, const GroupPoint& g,
                                 const QuadratureSpec& spec = {});

/// Inversion, reflection, x d_y p = y d_x p and the conjugate field identity, worst deviation.
VerificationReport check_kernel_symmetry(const GroupParams& params, double h, std::span<const GroupPoint> points,
                                         const QuadratureSpec& spec = {});

/// log of the Lemma-1 comparison function at g (interior branch only).
double lemma1_log_profile(const GroupParams& params, const GroupPoint& g);

/// p(g) over the comparison profile; boundary-branch points are excluded.
VerificationReport check_lemma1_estimate(const GroupParams& params, std::span<const GroupPoint> cloud,
                                         const QuadratureSpec& spec = {});

/// sup h |d_t log p_h| (left) and sup h |grad log p_h| / d (right) over cloud x hs, as two reports.
std::pair<VerificationReport, VerificationReport> check_lemma2(const GroupParams& params,
                                                               std::span<const GroupPoint> cloud,
                                                               std::span<const double> hs,
                                                               const QuadratureSpec& spec = {});

}  // namespace nhg
