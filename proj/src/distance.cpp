#include "nhg/distance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nhg/errors.hpp"
#include "nhg/rng.hpp"
#include "nhg/root_finding.hpp"

namespace nhg {

namespace {
constexpr double kPi = std::numbers::pi;
}

double x_minus_sin(double x) {
  if (std::fabs(x) >= 1.0) return x - std::sin(x);
  // x^3/3! - x^5/5! + ...
  const double x2 = x * x;
  double term = x * x2 / 6.0;
  double sum = 0.0;
  for (int k = 1; k < 20; ++k) {
    sum += term;
    term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

double mu(double omega) {
  if (!(std::fabs(omega) < kPi)) throw DomainError("mu needs |omega| < pi");
  if (std::fabs(omega) < 1e-3) {
    const double w2 = omega * omega;
    return omega * (2.0 / 3.0 + w2 * (4.0 / 45.0 + w2 * (4.0 / 315.0)));
  }
  if (std::fabs(omega) > 0.5 * kPi) {
    const double m = mu_near_pi(kPi - std::fabs(omega));
    return omega < 0 ? -m : m;
  }
  const double s = std::sin(omega);
  return x_minus_sin(2.0 * omega) / (2.0 * s * s);
}

double mu_near_pi(double gap) {
  if (!(gap > 0.0 && gap < kPi)) throw DomainError("mu_near_pi needs 0 < gap < pi");
  const double s = std::sin(gap);
  return (2.0 * kPi - 2.0 * gap + std::sin(2.0 * gap)) / (2.0 * s * s);
}

double mu_prime_near_pi(double gap) {
  return 2.0 + 2.0 * mu_near_pi(gap) * std::cos(gap) / std::sin(gap);
}

double mu_prime(double omega) {
  if (!(std::fabs(omega) < kPi)) throw DomainError("mu_prime needs |omega| < pi");
  if (std::fabs(omega) < 1e-3) {
    const double w2 = omega * omega;
    return 2.0 / 3.0 + w2 * (4.0 / 15.0 + w2 * (4.0 / 63.0));
  }
  if (std::fabs(omega) > 0.5 * kPi) return mu_prime_near_pi(kPi - std::fabs(omega));
  return 2.0 - 2.0 * mu(omega) / std::tan(omega);
}

double mu_inverse(double v) {
  if (v == 0.0) return 0.0;
  if (std::isnan(v)) throw DomainError("mu_inverse of nan");
  const double av = std::fabs(v);
  double w;
  if (av <= 0.5 * kPi) {
    auto f = [av](double x) { return std::pair{mu(x) - av, mu_prime(x)}; };
    w = solve_monotone(f, 0.0, 0.5 * kPi, 1e-8, 1e-15 * av).x;
  } else {
    double lo = 0.25 * kPi;
    while (lo > 0.0 && mu_near_pi(lo) < av) lo *= 0.5;
    if (lo == 0.0) return std::copysign(kPi, v);
    auto f = [av](double e) { return std::pair{mu_near_pi(e) - av, -mu_prime_near_pi(e)}; };
    const double gap = solve_monotone(f, lo, std::min(2.0 * lo, 0.5 * kPi), 1e-8 * lo, 1e-15 * av).x;
    w = kPi - gap;
  }
  return std::copysign(w, v);
}

const char* to_string(ThetaBranch b) {
  switch (b) {
    case ThetaBranch::interior: return "INTERIOR";
    case ThetaBranch::zl_zero_interior: return "ZL_ZERO_INTERIOR";
    case ThetaBranch::zl_zero_boundary: return "ZL_ZERO_BOUNDARY";
  }
  return "?";
}

std::vector<double> block_norms(const GroupParams& params, std::span<const double> g) {
  std::vector<double> rho(static_cast<std::size_t>(params.blocks()));
  for (int i = 0; i < params.blocks(); ++i) rho[static_cast<std::size_t>(i)] = block_norm2(params, g, i);
  return rho;
}

double theta_map(const GroupParams& params, std::span<const double> rho, double theta) {
  double s = 0.0;
  for (int j = 0; j < params.blocks(); ++j) {
    const double a = params.a()[static_cast<std::size_t>(j)];
    s += a * mu(a * theta) * rho[static_cast<std::size_t>(j)];
  }
  return s;
}

namespace {

// S and dS/dtheta at theta in [0, pi), blocks 0..l-1.
std::pair<double, double> map_theta(const GroupParams& params, std::span<const double> rho, double theta) {
  double s = 0.0, d = 0.0;
  for (int j = 0; j < params.blocks(); ++j) {
    const double r = rho[static_cast<std::size_t>(j)];
    if (r == 0.0) continue;
    const double a = params.a()[static_cast<std::size_t>(j)];
    s += a * mu(a * theta) * r;
    d += a * a * mu_prime(a * theta) * r;
  }
  return {s, d};
}

// S and dS/dgap at theta = pi - gap.
std::pair<double, double> map_gap(const GroupParams& params, std::span<const double> rho, double gap) {
  double s = 0.0, d = 0.0;
  const int l = params.blocks();
  for (int j = 0; j + 1 < l; ++j) {
    const double r = rho[static_cast<std::size_t>(j)];
    if (r == 0.0) continue;
    const double a = params.a()[static_cast<std::size_t>(j)];
    const double w = a * (kPi - gap);
    s += a * mu(w) * r;
    d -= a * a * mu_prime(w) * r;
  }
  const double rl = rho[static_cast<std::size_t>(l - 1)];
  if (rl != 0.0) {
    s += mu_near_pi(gap) * rl;
    d -= mu_prime_near_pi(gap) * rl;
  }
  return {s, d};
}

}  // namespace

ThetaSolution solve_theta(const GroupParams& params, std::span<const double> rho, double t) {
  const int l = params.blocks();
  if (rho.size() != static_cast<std::size_t>(l)) throw ParameterError("rho needs one entry per block");
  bool all_zero = true;
  for (double r : rho) all_zero = all_zero && r == 0.0;
  if (all_zero && t == 0.0) throw DomainError("theta is undefined at the origin");

  const double at = std::fabs(t);
  const bool zl_zero = rho[static_cast<std::size_t>(l - 1)] == 0.0;
  ThetaSolution sol;
  sol.branch = zl_zero ? ThetaBranch::zl_zero_interior : ThetaBranch::interior;
  if (t == 0.0) {
    sol.theta = 0.0;
    sol.gap = kPi;
    return sol;
  }
  const double ftol = std::min(0.1 * kThetaTolerance * (1.0 + at), 1e-15 * at);

  if (zl_zero) {
    double smax = 0.0;
    for (int j = 0; j + 1 < l; ++j) {
      const double a = params.a()[static_cast<std::size_t>(j)];
      smax += a * mu(a * kPi) * rho[static_cast<std::size_t>(j)];
    }
    if (at >= smax) {
      sol.branch = ThetaBranch::zl_zero_boundary;
      sol.at_pi = true;
      sol.theta = std::copysign(kPi, t);
      sol.gap = 0.0;
      return sol;
    }
  }

  const double mid = map_theta(params, rho, 0.5 * kPi).first - at;
  if (mid >= 0.0 || zl_zero) {
    // For z_l = 0 the map is smooth up to pi, so theta itself is a fine variable.
    const double hi = mid >= 0.0 ? 0.5 * kPi : kPi;
    const double lo = mid >= 0.0 ? 0.0 : 0.5 * kPi;
    auto f = [&](double x) {
      auto [s, d] = map_theta(params, rho, std::min(x, std::nextafter(kPi, 0.0)));
      return std::pair{s - at, d};
    };
    const RootResult r = solve_monotone(f, lo, hi, 1e-8, ftol);
    sol.theta = r.x;
    sol.gap = kPi - r.x;
    sol.residual = r.residual;
  } else {
    double e = 0.25 * kPi;
    while (e > 0.0 && map_gap(params, rho, e).first < at) e *= 0.5;
    if (e == 0.0) throw DomainError("theta-equation has no representable solution");
    const double ehi = std::min(2.0 * e, 0.5 * kPi);
    auto f = [&](double x) {
      auto [s, d] = map_gap(params, rho, x);
      return std::pair{s - at, d};
    };
    const RootResult r = solve_monotone(f, e, ehi, 1e-8 * e, ftol);
    sol.gap = r.x;
    sol.theta = kPi - r.x;
    sol.residual = r.residual;
  }
  if (sol.gap < 1e-10) sol.near_boundary = true;
  sol.theta = std::copysign(sol.theta, t);
  sol.residual = std::copysign(sol.residual, t);
  return sol;
}

ThetaSolution solve_theta(const GroupParams& params, const GroupPoint& g) {
  check_shape(params, g.coords());
  const auto rho = block_norms(params, g.coords());
  return solve_theta(params, rho, g.t());
}

namespace {

// |sin(a |theta|)| with the last block read off the gap when theta is near pi.
double sin_abs(const ThetaSolution& s, double a, bool last) {
  const double th = std::fabs(s.theta);
  if (last && th > 0.5 * kPi) return std::sin(s.gap);
  return std::sin(a * th);
}

double ratio_sq(double x, double s) {
  if (x == 0.0) return 1.0;
  const double q = x / s;
  return q * q;
}

}  // namespace

std::pair<double, double> distance_squared_forms(const GroupParams& params, const GroupPoint& g) {
  check_shape(params, g.coords());
  const auto rho = block_norms(params, g.coords());
  const ThetaSolution s = solve_theta(params, rho, g.t());
  if (s.branch == ThetaBranch::zl_zero_boundary) throw BranchError("closed forms need an interior theta");
  const double th = std::fabs(s.theta);
  const int l = params.blocks();
  double first = 0.0, second = 0.0;
  for (int j = 0; j < l; ++j) {
    const double r = rho[static_cast<std::size_t>(j)];
    if (r == 0.0) continue;
    const double a = params.a()[static_cast<std::size_t>(j)];
    const bool last = j == l - 1;
    const double sn = sin_abs(s, a, last);
    first += ratio_sq(a * th, sn) * r;
    if (th == 0.0) {
      second += r;
    } else {
      const double c = (last && th > 0.5 * kPi) ? -std::cos(s.gap) : std::cos(a * th);
      second += th * a * c / sn * r;
    }
  }
  second += th * std::fabs(g.t());
  return {first, second};
}

double distance_squared(const GroupParams& params, const GroupPoint& g) {
  check_shape(params, g.coords());
  const auto rho = block_norms(params, g.coords());
  bool zero = g.t() == 0.0;
  for (double r : rho) zero = zero && r == 0.0;
  if (zero) return 0.0;
  const ThetaSolution s = solve_theta(params, rho, g.t());
  const int l = params.blocks();
  if (s.branch == ThetaBranch::zl_zero_boundary) {
    double acc = std::fabs(g.t());
    for (int j = 0; j + 1 < l; ++j) {
      const double a = params.a()[static_cast<std::size_t>(j)];
      acc += a / std::tan(a * kPi) * rho[static_cast<std::size_t>(j)];
    }
    return kPi * acc;
  }
  const double th = std::fabs(s.theta);
  double d2 = 0.0;
  for (int j = 0; j < l; ++j) {
    const double r = rho[static_cast<std::size_t>(j)];
    if (r == 0.0) continue;
    const double a = params.a()[static_cast<std::size_t>(j)];
    d2 += ratio_sq(a * th, sin_abs(s, a, j == l - 1)) * r;
  }
  return d2;
}

double distance(const GroupParams& params, const GroupPoint& g) { return std::sqrt(distance_squared(params, g)); }

double distance(const GroupParams& params, const GroupPoint& g, const GroupPoint& h) {
  return distance(params, multiply(params, inverse(g), h));
}

double epsilon0(const GroupParams& params, const GroupPoint& g) {
  const ThetaSolution s = solve_theta(params, g);
  if (s.branch == ThetaBranch::zl_zero_boundary) throw BranchError("epsilon0 is undefined on the boundary branch");
  const double th = std::fabs(s.theta);
  if (th == 0.0) return 1.0;
  return (th > 0.5 * kPi ? std::sin(s.gap) : std::sin(th)) / th;
}

std::vector<GroupPoint> sample_cloud(const GroupParams& params, const SampleSpec& spec) {
  std::vector<GroupPoint> out;
  out.reserve(spec.count);
  const int dim = params.dim();
  for (std::size_t i = 0; i < spec.count; ++i) {
    StreamRng rng(spec.seed, 0xd157, i);
    GroupPoint g = GroupPoint::zeros(dim);
    for (int c = 0; c + 1 < dim; ++c) g[static_cast<std::size_t>(c)] = spec.z_max * (2.0 * rng.uniform() - 1.0);
    g[static_cast<std::size_t>(dim - 1)] = spec.t_max * (2.0 * rng.uniform() - 1.0);
    if (rng.uniform() < spec.degenerate_fraction) {
      // Zero one block, or all of z.
      const int pick = static_cast<int>(rng.uniform() * (params.blocks() + 1));
      for (int m = 0; m < params.n(); ++m) {
        if (pick == params.blocks() || params.block_of(m) == pick) {
          g[2 * static_cast<std::size_t>(m)] = 0.0;
          g[2 * static_cast<std::size_t>(m) + 1] = 0.0;
        }
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

VerificationReport check_distance_equivalence(const GroupParams& params, const SampleSpec& spec) {
  VerificationReport rep;
  rep.id = "distance-equivalence";
  rep.description = "d^2 / (|z|^2 + |t|) over a box cloud";
  rep.seed = spec.seed;
  for (const auto& g : sample_cloud(params, spec)) {
    const double hn = z_norm2(g.coords()) + std::fabs(g.t());
    if (hn == 0.0) {
      ++rep.excluded;
      continue;
    }
    rep.left.push_back(distance_squared(params, g));
    rep.right.push_back(hn);
  }
  rep.summarize_ratios();
  rep.pass = rep.judge_band() && rep.min_ratio > 0.0;
  return rep;
}

}  // namespace nhg
