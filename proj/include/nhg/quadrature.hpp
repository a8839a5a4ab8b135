#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nhg {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

/// m-point Gauss-Legendre rule on [-1, 1].
Rule gauss_legendre(int m);
/// m-point Gauss-Legendre rule on [a, b].
Rule gauss_legendre(int m, double a, double b);
/// m-point Gauss-Jacobi-type rule for weight r^p on [0, R] (p >= 0), built from Legendre nodes
/// after the substitution r = R u^{1/(p+1)}.
Rule radial_rule(int m, double radius, int power);

/// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> v);

/// Gauss-Kronrod 7/15 nodes on [-1, 1]: 15 abscissae with Kronrod weights and
/// Gauss weights (zero on Kronrod-only nodes).
struct GK15 {
  double x[15];
  double wk[15];
  double wg[15];
};
const GK15& gk15();

struct Panel {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> value;   ///< Kronrod estimate per component
  std::vector<double> error;   ///< |Kronrod - Gauss| per component
  std::vector<double> l1;      ///< Kronrod estimate of the integral of |f|
  double peak = 0.0;           ///< max |f_c| / scale_c over the nodes
};

/// f(s, out) writes `components` values at s.
using VectorIntegrand = std::function<void(double, double*)>;

Panel integrate_panel(const VectorIntegrand& f, int components, double a, double b);

struct HalfLineOptions {
  double initial_width = 0.1;
  double max_width = 1.0;
  /// Exponential decay rate of the integrand tail.
  double decay = 1.0;
  /// Do not stop marching before this point.
  double min_extent = 0.0;
  double rel_tol = 1e-10;
  int panel_budget = 4000;
  double max_extent = 1e6;
  /// When finite, integrate over [0, stop_at] only (no tail).
  double stop_at = HUGE_VAL;
};

struct IntegralResult {
  std::vector<double> value;
  std::vector<double> error;
  std::vector<double> l1;
  int panels = 0;
  bool converged = false;
};

/// Integrates a vector-valued function over [0, inf) by marching GK15 panels until the
/// tail is negligible, then bisecting the worst panels until every component meets
/// rel_tol relative to its L1 norm.  Component sums use pairwise summation in panel order.
IntegralResult integrate_half_line(const VectorIntegrand& f, int components, const HalfLineOptions& opt);

/// Adaptive GK15 on a finite interval for a scalar integrand.
IntegralResult integrate_interval(const std::function<double(double)>& f, double a, double b, double rel_tol,
                                  double abs_tol = 0.0, int panel_budget = 2000);

/// Product rule on the Euclidean ball of radius R in R^d, in hyperspherical
/// coordinates: Gauss-Legendre in r (weight r^{d-1}) and in the polar angles
/// (weights sin^k), trapezoid in the last angle.  Points are row-major d-vectors.
struct BallRule {
  int dim = 0;
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};
BallRule ball_rule(int dim, double radius, int radial_nodes, int angular_nodes);

}  // namespace nhg
