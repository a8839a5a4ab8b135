#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nhg/group.hpp"
#include "nhg/heat_kernel.hpp"
#include "nhg/report.hpp"
#include "nhg/test_function.hpp"

namespace nhg {

// --- diffusion ------------------------------------------------------------------

enum class LevyRule {
  /// Area of the piecewise-linear interpolant only; weak error O(1/steps).
  trapezoid,
  /// Trapezoid plus an exact Brownian-bridge area per step, so the endpoint law is exact.
  bridge,
};

struct DiffusionSpec {
  int steps = 100;
  std::size_t paths = 20000;
  std::uint64_t seed = 1;
  LevyRule levy = LevyRule::bridge;
};

void validate(const DiffusionSpec& spec);

/// Endpoint of path `index` of the diffusion generated by sum (X^2 + Y^2), run for time h.
GroupPoint sample_heat_point(const GroupParams& params, double h, const DiffusionSpec& spec, std::size_t index);

/// All spec.paths endpoints, row-major (paths x dim).
std::vector<double> sample_heat_points_serial(const GroupParams& params, double h, const DiffusionSpec& spec);
std::vector<double> sample_heat_points_parallel(const GroupParams& params, double h, const DiffusionSpec& spec);

/// Paths at h = 1; other times are reached by dilation, which preserves the law.
class HeatSample {
 public:
  HeatSample(const GroupParams& params, const DiffusionSpec& spec, bool parallel = true);

  const GroupParams& params() const { return params_; }
  const DiffusionSpec& spec() const { return spec_; }
  std::size_t size() const { return spec_.paths; }
  std::span<const double> point(std::size_t i) const {
    const auto d = static_cast<std::size_t>(params_.dim());
    return std::span<const double>(pts_).subspan(i * d, d);
  }
  /// Distance of every path endpoint from the origin (computed on first use).
  const std::vector<double>& distances() const;

 private:
  GroupParams params_;
  DiffusionSpec spec_;
  std::vector<double> pts_;
  mutable std::vector<double> dist_;
};

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Mean of F(g . delta_sqrt(h) W_i) over the sample.
Estimate mc_expectation(const HeatSample& sample, double h, const GroupPoint& g,
                        const std::function<double(std::span<const double>)>& F);

Estimate semigroup_mc(const HeatSample& sample, const SmoothFunction& f, double h, const GroupPoint& g);

struct GradientEstimate {
  std::vector<double> components;
  std::vector<double> se;
  double norm = 0.0;
  double norm_se = 0.0;
};

/// Pathwise gradient: the field is applied to the g-slot of f(g . W) by the chain rule.
GradientEstimate grad_semigroup_mc(const HeatSample& sample, const SmoothFunction& f, double h, const GroupPoint& g,
                                   Side side = Side::left);

// --- quadrature ------------------------------------------------------------------

/// Ball rule for the convolution path.  It resolves kernels with sqrt(h) down to about
/// half the support radius at angular = 8; finer kernels raise ResolutionError.
struct GridSpec {
  int radial = 12;
  int angular = 8;
  double kernel_tol = 1e-12;
};

/// int_{supp f} F(w) p_h(g^{-1} w) dw on a ball rule over the support ball of `support_of`.
double convolve_quadrature(const GroupParams& params, const SmoothFunction& support_of, double h, const GroupPoint& g,
                           const std::function<double(std::span<const double>)>& F, const GridSpec& grid = {});

/// e^{h Delta} f(g) by quadrature; f must be compactly supported.
double semigroup_quadrature(const GroupParams& params, const SmoothFunction& f, double h, const GroupPoint& g,
                            const GridSpec& grid = {});

/// Central differences of semigroup_quadrature along g.exp(eE) (left) or exp(eE).g (right).
std::vector<double> grad_semigroup_fd(const GroupParams& params, const SmoothFunction& f, double h,
                                      const GroupPoint& g, Side side = Side::left, const GridSpec& grid = {},
                                      double eps = 1e-3);

enum class Method { quadrature, mc };

struct SemigroupSpec {
  DiffusionSpec diffusion;
  GridSpec grid;
};

double semigroup_apply(const GroupParams& params, const SmoothFunction& f, double h, const GroupPoint& g, Method method,
                       const SemigroupSpec& spec = {});
/// |grad e^{h Delta} f|(g), Monte-Carlo pathwise estimator.
double grad_semigroup(const GroupParams& params, const SmoothFunction& f, double h, const GroupPoint& g,
                      const SemigroupSpec& spec = {});

// --- family sweeps ---------------------------------------------------------------

/// Monte-Carlo statistics of one (f, g, h) triple.
struct SweepRow {
  std::size_t f_index = 0;
  std::size_t g_index = 0;
  double h = 0.0;
  Estimate value;     ///< e^{h Delta} f
  Estimate grad_abs;  ///< e^{h Delta} |grad f|
  Estimate grad_sq;   ///< e^{h Delta} |grad f|^2
  Estimate f_sq;      ///< e^{h Delta} f^2
  Estimate entropy;   ///< e^{h Delta} f^2 log f^2
  double grad_norm = 0.0;  ///< |grad e^{h Delta} f|
  double grad_norm_se = 0.0;
  double variance_numerator = 0.0;
  double entropy_numerator = 0.0;
};

/// Ratio denominators at or under 10 standard errors are excluded from sups.
bool below_floor(const Estimate& e);

std::vector<SweepRow> sweep_family(const HeatSample& sample, std::span<const TestFunction> family,
                                   std::span<const GroupPoint> points, std::span<const double> hs);

/// K-hat = sup |grad e^{h Delta} f| / e^{h Delta}|grad f|; denominators under 10 SE are excluded.
VerificationReport check_li_inequality(std::span<const SweepRow> rows);
VerificationReport check_li_inequality(const HeatSample& sample, std::span<const TestFunction> family,
                                       std::span<const GroupPoint> points, std::span<const double> hs);

/// Log-Sobolev (first) and Poincare (second) ratios over h e^{h Delta}|grad f|^2.
std::pair<VerificationReport, VerificationReport> check_log_sobolev_poincare(std::span<const SweepRow> rows);

/// |grad e^{h Delta} f| <= K (e^{h Delta}|grad f|^2)^{1/2} and the Jensen step, sample-wise within 3 SE.
VerificationReport check_holder_corollary(std::span<const SweepRow> rows, double K);

// --- identities ------------------------------------------------------------------

/// X-hat e^{h Delta} f = e^{h Delta} X-hat f, both by quadrature and by Monte Carlo.
VerificationReport check_commutation(const GroupParams& params, const TestFunction& f, double h, const GroupPoint& g,
                                     const HeatSample& sample, const GridSpec& grid = {});

/// int (X f) p_h = - int f (X p_h) for every left and right field.
VerificationReport check_integration_by_parts(const GroupParams& params, const TestFunction& f, double h,
                                              const GridSpec& grid = {});

/// e^{h Delta} f(g) = e^{Delta} f_{g,h}(0) and the matching gradient scaling h^{-1/2}.
VerificationReport check_translation_dilation_reduction(const GroupParams& params, const TestFunction& f, double h,
                                                        const GroupPoint& g, const GridSpec& grid = {});

/// Kernel t-marginal equals the Gaussian (4 pi h)^{-n} exp(-|z|^2/4h), and Monte Carlo against
/// quadrature for a wide bump centred at g.
VerificationReport check_markov(const GroupParams& params, const HeatSample& sample, std::span<const GroupPoint> points,
                                std::span<const double> hs, const GridSpec& grid = {});

/// p_{h1+h2}(g) = E p_{h2}(V^{-1} g) with V ~ p_{h1}, and two-stage Monte Carlo against quadrature for
/// a wide plain bump centred at c, evaluated at c . delta_{1/2}(g) with c the centre of f.
VerificationReport check_semigroup_property(const GroupParams& params, const HeatSample& sample, const TestFunction& f,
                                            double h1, double h2, std::span<const GroupPoint> points,
                                            const GridSpec& grid = {});

/// Endpoint histogram over block radii and t against bin masses of the kernel.
VerificationReport check_histogram(const GroupParams& params, const HeatSample& sample, double h);

// --- Cheeger pieces ----------------------------------------------------------------

/// T(z) > 0 with d(z, T) = 1, for |z| < 1.
double ball_t_extent(const GroupParams& params, std::span<const double> z);
/// max_z T(z), searched over a grid of block norms.
double ball_t_max(const GroupParams& params);

struct BallSampleSpec {
  std::size_t count = 20000;
  std::uint64_t seed = 1;
};

/// Uniform points of the unit CC ball, row-major.
std::vector<double> sample_unit_ball(const GroupParams& params, const BallSampleSpec& spec);

Estimate ball_mean_mc(const GroupParams& params, const SmoothFunction& f, std::span<const double> ball_points);
double ball_mean_grid(const GroupParams& params, const SmoothFunction& f, const GridSpec& grid = {});

/// Theorem-2 ratio (global), Lemma-3 ratio (on B) and Lemma-4 ratio (B^c part), in that order.
std::array<VerificationReport, 3> check_cheeger(const HeatSample& sample, std::span<const TestFunction> family,
                                                const BallSampleSpec& ball);

}  // namespace nhg
