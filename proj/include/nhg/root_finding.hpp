#pragma once

#include <cmath>
#include <utility>

namespace nhg {

struct RootResult {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Safeguarded root of a monotone scalar function on [lo, hi].
///
/// `f(x)` returns {F(x), F'(x)}; F must change sign across the bracket.
/// Bisects until the bracket is narrower than `width`, then polishes with
/// Newton steps that are rejected whenever they leave the bracket.
template <class F>
RootResult solve_monotone(F&& f, double lo, double hi, double width, double ftol, int max_iter = 200) {
  auto [flo, dlo] = f(lo);
  (void)dlo;
  const bool increasing = flo <= 0.0;
  auto below = [&](double v) { return increasing ? v < 0.0 : v > 0.0; };

  RootResult r;
  double x = 0.5 * (lo + hi);
  while (hi - lo > width && r.iterations < max_iter) {
    x = 0.5 * (lo + hi);
    const double v = f(x).first;
    ++r.iterations;
    if (v == 0.0) return {x, 0.0, r.iterations};
    if (below(v)) lo = x; else hi = x;
  }
  x = 0.5 * (lo + hi);
  double best_x = x;
  double best_v = HUGE_VAL;
  for (int k = 0; k < 60 && r.iterations < max_iter; ++k, ++r.iterations) {
    auto [v, d] = f(x);
    if (std::fabs(v) < std::fabs(best_v)) {
      best_v = v;
      best_x = x;
    }
    if (std::fabs(v) <= ftol || v == 0.0) break;
    if (below(v)) lo = x; else hi = x;
    double nx = x - v / d;
    if (!(nx > lo && nx < hi) || !std::isfinite(nx)) nx = 0.5 * (lo + hi);
    if (nx == x) break;
    x = nx;
  }
  r.x = best_x;
  r.residual = best_v;
  return r;
}

}  // namespace nhg
