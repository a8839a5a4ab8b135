#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nhg/group.hpp"
#include "nhg/heat_kernel.hpp"
#include "nhg/report.hpp"
#include "nhg/test_function.hpp"

namespace nhg {

/// (u, eta) with u stored like the z-part of a group point: [Re u_{1,1}, Im u_{1,1}, ...].
struct PolarPoint {
  std::vector<double> u;
  double eta = 0.0;
};

/// U = (4 sum a_j^2 |u_j|^2)^{1/2}.
double polar_U(const GroupParams& params, const PolarPoint& p);
/// |u'|^2 (all blocks but the last) and |u_l|^2.
double polar_uprime2(const GroupParams& params, const PolarPoint& p);
double polar_ul2(const GroupParams& params, const PolarPoint& p);
/// Throws ParameterError unless u_l != 0 and 0 < |eta| < pi.
void check_polar(const GroupParams& params, const PolarPoint& p);
/// U |eta| < 1.
bool in_unit_ball(const GroupParams& params, const PolarPoint& p);

GroupPoint psi(const GroupParams& params, const PolarPoint& p);
/// Needs z_l != 0 and t != 0 (BranchError otherwise).
PolarPoint psi_inverse(const GroupParams& params, const GroupPoint& g);

/// Rows (x_{1,1}, y_{1,1}, ..., t), columns (Re u_{1,1}, Im u_{1,1}, ..., eta).
Eigen::MatrixXd jacobian_matrix(const GroupParams& params, const PolarPoint& p);

/// Determinant of a matrix made of 2x2 diagonal blocks bordered by a full last row and
/// column, by peeling off the leading block.  ParameterError for any other shape.
double det_via_lemma5(const Eigen::MatrixXd& M);

/// log J(u, eta) from the closed form.
double log_jacobian(const GroupParams& params, const PolarPoint& p);
double jacobian_closed_form(const GroupParams& params, const PolarPoint& p);

enum class Region { R1, R2, R3 };
const char* to_string(Region r);
inline constexpr double kTheta0 = 0.78539816339744830962;  // pi/4
inline constexpr double kGamma0 = 100.0;
inline constexpr double kTheta1 = 0.39269908169872415481;  // pi/8

/// |u'|^2 (pi - |eta|)^2 + |u_l|^2 (pi - |eta|).
double region_gamma(const GroupParams& params, const PolarPoint& p);
/// DomainError for points of B.
Region classify_region(const GroupParams& params, const PolarPoint& p);

/// Which line of the piecewise comparison applies.
enum class EstimateCase { ball, far_from_pi, near_pi_large, near_pi_small };
EstimateCase estimate_case(const GroupParams& params, const PolarPoint& p);
/// log of the comparison quantity for p(u,eta) J(u,eta) (and for p alone), using the
/// case picked by estimate_case or a forced case.
double log_pj_estimate(const GroupParams& params, const PolarPoint& p, EstimateCase c);
double log_pj_estimate(const GroupParams& params, const PolarPoint& p);
double pj_estimate(const GroupParams& params, const PolarPoint& p);
double log_p_estimate(const GroupParams& params, const PolarPoint& p, EstimateCase c);
double log_p_estimate(const GroupParams& params, const PolarPoint& p);
/// The J-equivalence profile |eta|^{2n+2} (pi-|eta|)^{2k_l-1} (|u'|^2 (pi-|eta|) + |u_l|^2), in log form.
double log_jacobian_profile(const GroupParams& params, const PolarPoint& p);

struct PolarSampleSpec {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  /// Largest U |eta| for R1/R3 samples.
  double max_distance = 6.0;
};

/// B^c points cycling through R1, R2, R3.
std::vector<PolarPoint> sample_polar_cloud(const GroupParams& params, const PolarSampleSpec& spec);
/// Random valid polar points anywhere (B and B^c).
std::vector<PolarPoint> sample_polar_points(const GroupParams& params, std::size_t count, std::uint64_t seed,
                                            double u_max = 2.0);

struct Lemma6Value {
  double ratio = 0.0;
  double integral_rel_error = 0.0;
  Region region = Region::R1;
  int evaluations = 0;
};

/// |u|^2 eta^2 int_1^{pi/|eta|} p(u, v eta) J(u, v eta) dv / (p(u, eta) J(u, eta)).
Lemma6Value lemma6_ratio(const GroupParams& params, const PolarPoint& p, const QuadratureSpec& spec = {},
                         double rel_tol = 1e-7);
VerificationReport check_lemma6(const GroupParams& params, std::span<const PolarPoint> cloud,
                                const QuadratureSpec& spec = {});

/// Horizontal velocity expansion, Cauchy-Schwarz bound and path speed along s -> Psi(u, s eta).
VerificationReport horizontal_path_check(const GroupParams& params, const PolarPoint& p, const SmoothFunction& f,
                                         int samples = 16);

/// int F dm (exact) against a Monte-Carlo estimate of int F(Psi) J du deta over a box.
VerificationReport check_change_of_variables(const GroupParams& params, const TestFunction& F, std::size_t samples,
                                             std::uint64_t seed);

}  // namespace nhg
