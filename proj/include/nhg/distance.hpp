#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nhg/group.hpp"
#include "nhg/report.hpp"

namespace nhg {

/// (2w - sin 2w) / (2 sin^2 w) on (-pi, pi).
double mu(double omega);
double mu_prime(double omega);
/// mu(pi - gap) for 0 < gap < pi, accurate when gap is tiny.
double mu_near_pi(double gap);
/// mu'(pi - gap).
double mu_prime_near_pi(double gap);
double mu_inverse(double v);

/// x - sin x without cancellation for small x.
double x_minus_sin(double x);

enum class ThetaBranch { interior, zl_zero_interior, zl_zero_boundary };

const char* to_string(ThetaBranch b);

struct ThetaSolution {
  /// Signed theta; on the boundary branch this is +-pi only as a convenience, test `at_pi`.
  double theta = 0.0;
  /// pi - |theta|, computed directly so it keeps full relative accuracy near pi.
  double gap = 0.0;
  /// The AT_PI symbol: theta sits at +-pi (sign of t) on the boundary branch.
  bool at_pi = false;
  ThetaBranch branch = ThetaBranch::interior;
  double residual = 0.0;
  /// Interior solve close to +-pi accepted with a widened residual tolerance.
  bool near_boundary = false;
};

inline constexpr double kThetaTolerance = 1e-12;

ThetaSolution solve_theta(const GroupParams& params, const GroupPoint& g);
/// Same, from block norms rho_i = |z_i|^2 and t.
ThetaSolution solve_theta(const GroupParams& params, std::span<const double> rho, double t);

/// sum_j a_j mu(a_j theta) rho_j, the right side of the theta-equation.
double theta_map(const GroupParams& params, std::span<const double> rho, double theta);

std::vector<double> block_norms(const GroupParams& params, std::span<const double> g);

double distance_squared(const GroupParams& params, const GroupPoint& g);
/// Both interior closed forms: sum (a theta / sin a theta)^2 rho and theta (t + sum a cot(a theta) rho).
/// Throws BranchError on the boundary branch.
std::pair<double, double> distance_squared_forms(const GroupParams& params, const GroupPoint& g);
double distance(const GroupParams& params, const GroupPoint& g);
/// d(g, h) = d(g^{-1} h).
double distance(const GroupParams& params, const GroupPoint& g, const GroupPoint& h);

/// sin(theta)/theta on the interior branches; BranchError on the boundary branch.
double epsilon0(const GroupParams& params, const GroupPoint& g);

struct SampleSpec {
  std::size_t count = 10000;
  double z_max = 3.0;
  double t_max = 3.0;
  std::uint64_t seed = 1;
  /// Fraction of points drawn with some block exactly zero (exercises the branch logic).
  double degenerate_fraction = 0.2;
};

/// Deterministic random cloud in the box |z coords| <= z_max, |t| <= t_max.
std::vector<GroupPoint> sample_cloud(const GroupParams& params, const SampleSpec& spec);

/// d^2 / (|z|^2 + |t|) over the cloud.
VerificationReport check_distance_equivalence(const GroupParams& params, const SampleSpec& spec);

}  // namespace nhg
