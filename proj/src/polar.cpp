#include "nhg/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nhg/distance.hpp"
#include "nhg/errors.hpp"
#include "nhg/quadrature.hpp"
#include "nhg/rng.hpp"

namespace nhg {

namespace {
constexpr double kPi = std::numbers::pi;

double block_u2(const GroupParams& params, const PolarPoint& p, int i) {
  return block_norm2(params, std::span<const double>(p.u.data(), p.u.size() + 1), i);
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}
}  // namespace

double polar_U(const GroupParams& params, const PolarPoint& p) {
  double s = 0.0;
  for (int m = 0; m < params.n(); ++m) {
    const double a = params.coef(m);
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    s += a * a * (p.u[i] * p.u[i] + p.u[i + 1] * p.u[i + 1]);
  }
  return std::sqrt(4.0 * s);
}

double polar_ul2(const GroupParams& params, const PolarPoint& p) {
  double s = 0.0;
  for (int m = params.block_begin(params.blocks() - 1); m < params.n(); ++m) {
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    s += p.u[i] * p.u[i] + p.u[i + 1] * p.u[i + 1];
  }
  return s;
}

double polar_uprime2(const GroupParams& params, const PolarPoint& p) {
  return std::max(0.0, norm2(p.u) - polar_ul2(params, p));
}

void check_polar(const GroupParams& params, const PolarPoint& p) {
  if (p.u.size() != 2 * static_cast<std::size_t>(params.n())) throw ParameterError("u has the wrong length");
  if (!(std::fabs(p.eta) > 0.0 && std::fabs(p.eta) < kPi)) throw ParameterError("polar point needs 0 < |eta| < pi");
  if (polar_ul2(params, p) == 0.0) throw ParameterError("polar point needs u_l != 0");
}

bool in_unit_ball(const GroupParams& params, const PolarPoint& p) {
  return polar_U(params, p) * std::fabs(p.eta) < 1.0;
}

GroupPoint psi(const GroupParams& params, const PolarPoint& p) {
  check_polar(params, p);
  GroupPoint g = GroupPoint::zeros(params.dim());
  double t = 0.0;
  for (int m = 0; m < params.n(); ++m) {
    const double a = params.coef(m);
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    const double s = std::sin(a * p.eta), c = std::cos(a * p.eta);
    // 1 - exp(-2 i a eta) = 2 sin(a eta) (sin(a eta) + i cos(a eta))
    g[i] = 2.0 * s * (s * p.u[i] - c * p.u[i + 1]);
    g[i + 1] = 2.0 * s * (c * p.u[i] + s * p.u[i + 1]);
    t += 2.0 * a * (p.u[i] * p.u[i] + p.u[i + 1] * p.u[i + 1]) * x_minus_sin(2.0 * a * p.eta);
  }
  g.coords().back() = t;
  return g;
}

PolarPoint psi_inverse(const GroupParams& params, const GroupPoint& g) {
  check_shape(params, g.coords());
  if (block_norm2(params, g.coords(), params.blocks() - 1) == 0.0 || g.t() == 0.0)
    throw BranchError("polar coordinates need z_l != 0 and t != 0");
  const ThetaSolution th = solve_theta(params, g);
  PolarPoint p;
  p.eta = th.theta;
  p.u.resize(2 * static_cast<std::size_t>(params.n()));
  const double sg = th.theta < 0 ? -1.0 : 1.0;
  const bool wide = std::fabs(th.theta) > 0.5 * kPi;
  for (int m = 0; m < params.n(); ++m) {
    const double a = params.coef(m);
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    double s, c;
    if (a == 1.0 && wide) {
      s = sg * std::sin(th.gap);
      c = -std::cos(th.gap);
    } else {
      s = std::sin(a * th.theta);
      c = std::cos(a * th.theta);
    }
    p.u[i] = (g[i] * s + g[i + 1] * c) / (2.0 * s);
    p.u[i + 1] = (g[i + 1] * s - g[i] * c) / (2.0 * s);
  }
  return p;
}

Eigen::MatrixXd jacobian_matrix(const GroupParams& params, const PolarPoint& p) {
  check_polar(params, p);
  const int N = params.dim();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
  double corner = 0.0;
  for (int m = 0; m < params.n(); ++m) {
    const double a = params.coef(m);
    const int i = 2 * m;
    const double s = std::sin(a * p.eta), c = std::cos(a * p.eta);
    const double one_minus_cos = 2.0 * s * s, sin2 = 2.0 * s * c, cos2 = 1.0 - one_minus_cos;
    const double re = p.u[static_cast<std::size_t>(i)], im = p.u[static_cast<std::size_t>(i) + 1];
    J(i, i) = one_minus_cos;
    J(i, i + 1) = -sin2;
    J(i + 1, i) = sin2;
    J(i + 1, i + 1) = one_minus_cos;
    J(i, N - 1) = 2.0 * a * (sin2 * re - cos2 * im);
    J(i + 1, N - 1) = 2.0 * a * (sin2 * im + cos2 * re);
    const double w = x_minus_sin(2.0 * a * p.eta);
    J(N - 1, i) = 4.0 * a * re * w;
    J(N - 1, i + 1) = 4.0 * a * im * w;
    corner += 4.0 * a * a * (re * re + im * im) * one_minus_cos;
  }
  J(N - 1, N - 1) = corner;
  return J;
}

namespace {

double det3(const Eigen::MatrixXd& M) {
  return M(0, 0) * (M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1)) - M(0, 1) * (M(1, 0) * M(2, 2) - M(1, 2) * M(2, 0)) +
         M(0, 2) * (M(1, 0) * M(2, 1) - M(1, 1) * M(2, 0));
}

void check_arrowhead(const Eigen::MatrixXd& M) {
  const Eigen::Index m = M.rows();
  if (M.cols() != m || m % 2 == 0) throw ParameterError("block-arrowhead matrix must be square of odd size");
  for (Eigen::Index r = 0; r + 1 < m; ++r) {
    const Eigen::Index b = r / 2;
    for (Eigen::Index c = 0; c + 1 < m; ++c) {
      if (c / 2 == b) continue;
      if (M(r, c) != 0.0) throw ParameterError("matrix lacks the 2x2 block-arrowhead sparsity");
    }
  }
}

double det_rec(const Eigen::MatrixXd& M) {
  const Eigen::Index m = M.rows();
  if (m == 1) return M(0, 0);
  if (m == 3) return det3(M);
  const double b1 = M(0, 0), b2 = M(0, 1), b3 = M(0, m - 1);
  const double b4 = M(1, 0), b5 = M(1, 1), b6 = M(1, m - 1);
  const double b7 = M(m - 1, 0), b8 = M(m - 1, 1);
  const Eigen::MatrixXd Q = M.bottomRightCorner(m - 2, m - 2);
  double q1 = 1.0;
  for (Eigen::Index k = 0; k + 1 < m - 2; k += 2) q1 *= Q(k, k) * Q(k + 1, k + 1) - Q(k, k + 1) * Q(k + 1, k);
  return (b1 * b5 - b2 * b4) * det_rec(Q) + (b3 * b4 * b8 + b2 * b6 * b7 - b1 * b6 * b8 - b3 * b5 * b7) * q1;
}

// 2 - 2 cos x - x sin x, x >= 0.
double jac_factor(double x) {
  if (x < 2.0) {
    const double x2 = x * x;
    double term = x2 * x2 / 24.0;  // x^4 / 4!
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      const double add = -sgn * (2.0 - 2.0 * k) * term;
      sum += add;
      if (std::fabs(add) < 1e-18 * std::fabs(sum)) break;
      term *= x2 / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
    }
    return sum;
  }
  const double s = std::sin(0.5 * x), c = std::cos(0.5 * x);
  return 2.0 * s * (2.0 * s - x * c);
}

}  // namespace

double det_via_lemma5(const Eigen::MatrixXd& M) {
  check_arrowhead(M);
  return det_rec(M);
}

double log_jacobian(const GroupParams& params, const PolarPoint& p) {
  check_polar(params, p);
  const int l = params.blocks();
  const double ae = std::fabs(p.eta);
  std::vector<double> logA(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) {
    const double s = std::sin(params.a()[static_cast<std::size_t>(i)] * ae);
    logA[static_cast<std::size_t>(i)] = std::log(4.0) + 2.0 * std::log(s);
  }
  double sum_all = 0.0;
  for (int i = 0; i < l; ++i) sum_all += params.k()[static_cast<std::size_t>(i)] * logA[static_cast<std::size_t>(i)];
  std::vector<double> terms;
  for (int j = 0; j < l; ++j) {
    const double u2 = block_u2(params, p, j);
    if (u2 == 0.0) continue;
    const double a = params.a()[static_cast<std::size_t>(j)];
    const auto ju = static_cast<std::size_t>(j);
    terms.push_back(sum_all - logA[ju] + std::log(8.0 * a * a * u2) + std::log(jac_factor(2.0 * a * ae)));
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - mx);
  return mx + std::log(acc);
}

double jacobian_closed_form(const GroupParams& params, const PolarPoint& p) { return std::exp(log_jacobian(params, p)); }

const char* to_string(Region r) {
  switch (r) {
    case Region::R1: return "R1";
    case Region::R2: return "R2";
    case Region::R3: return "R3";
  }
  return "?";
}

double region_gamma(const GroupParams& params, const PolarPoint& p) {
  const double gap = kPi - std::fabs(p.eta);
  return polar_uprime2(params, p) * gap * gap + polar_ul2(params, p) * gap;
}

Region classify_region(const GroupParams& params, const PolarPoint& p) {
  check_polar(params, p);
  if (in_unit_ball(params, p)) throw DomainError("region labels are defined on the complement of the unit ball");
  if (std::fabs(p.eta) < kTheta0) return Region::R1;
  return region_gamma(params, p) > kGamma0 ? Region::R2 : Region::R3;
}

EstimateCase estimate_case(const GroupParams& params, const PolarPoint& p) {
  check_polar(params, p);
  if (in_unit_ball(params, p)) return EstimateCase::ball;
  const double gap = kPi - std::fabs(p.eta);
  if (gap >= kPi / 8.0) return EstimateCase::far_from_pi;
  return region_gamma(params, p) >= kGamma0 ? EstimateCase::near_pi_large : EstimateCase::near_pi_small;
}

double log_jacobian_profile(const GroupParams& params, const PolarPoint& p) {
  const double ae = std::fabs(p.eta), gap = kPi - ae;
  const double kl = params.k().back();
  return (2.0 * params.n() + 2.0) * std::log(ae) + (2.0 * kl - 1.0) * std::log(gap) +
         std::log(polar_uprime2(params, p) * gap + polar_ul2(params, p));
}

double log_pj_estimate(const GroupParams& params, const PolarPoint& p, EstimateCase c) {
  check_polar(params, p);
  const double ae = std::fabs(p.eta), gap = kPi - ae;
  const double U = polar_U(params, p);
  const double E = -0.25 * U * U * ae * ae;
  const double up2 = polar_uprime2(params, p), ul2 = polar_ul2(params, p);
  const double kl = params.k().back();
  switch (c) {
    case EstimateCase::ball: return log_jacobian_profile(params, p);
    case EstimateCase::far_from_pi:
      return 0.5 * std::log(up2 + ul2) + (2.0 * params.n() + 1.0) * std::log(ae) + E;
    case EstimateCase::near_pi_large: return 0.5 * std::log(up2 * gap + ul2) + (kl - 0.5) * std::log(gap) + E;
    case EstimateCase::near_pi_small:
      return (kl - 1.0) * std::log(ul2 + std::sqrt(up2) + std::sqrt(ul2) * gap) + (2.0 * kl - 1.0) * std::log(gap) +
             std::log(up2 * gap + ul2) + E;
  }
  return 0.0;
}

double log_pj_estimate(const GroupParams& params, const PolarPoint& p) {
  return log_pj_estimate(params, p, estimate_case(params, p));
}

double pj_estimate(const GroupParams& params, const PolarPoint& p) { return std::exp(log_pj_estimate(params, p)); }

double log_p_estimate(const GroupParams& params, const PolarPoint& p, EstimateCase c) {
  check_polar(params, p);
  const double ae = std::fabs(p.eta), gap = kPi - ae;
  const double U = polar_U(params, p);
  const double E = -0.25 * U * U * ae * ae;
  const double up2 = polar_uprime2(params, p), ul2 = polar_ul2(params, p);
  const double kl = params.k().back();
  switch (c) {
    case EstimateCase::ball: return 0.0;
    case EstimateCase::far_from_pi: return -0.5 * std::log(up2 + ul2) - std::log(ae) + E;
    case EstimateCase::near_pi_large: return -0.5 * std::log(up2 * gap + ul2) - (kl - 0.5) * std::log(gap) + E;
    case EstimateCase::near_pi_small:
      return (kl - 1.0) * std::log(ul2 + std::sqrt(up2) + std::sqrt(ul2) * gap) + E;
  }
  return 0.0;
}

double log_p_estimate(const GroupParams& params, const PolarPoint& p) {
  return log_p_estimate(params, p, estimate_case(params, p));
}

// --- sampling ------------------------------------------------------------------

namespace {

PolarPoint random_direction(const GroupParams& params, StreamRng& rng) {
  PolarPoint p;
  p.u.resize(2 * static_cast<std::size_t>(params.n()));
  std::vector<double> bw(static_cast<std::size_t>(params.blocks()));
  for (auto& w : bw) w = std::exp(rng.normal());
  // Occasionally drop u' entirely.
  if (params.blocks() > 1 && rng.uniform() < 0.15) {
    for (std::size_t j = 0; j + 1 < bw.size(); ++j) bw[j] = 0.0;
  }
  for (int m = 0; m < params.n(); ++m) {
    const double w = bw[static_cast<std::size_t>(params.block_of(m))];
    p.u[2 * static_cast<std::size_t>(m)] = w * rng.normal();
    p.u[2 * static_cast<std::size_t>(m) + 1] = w * rng.normal();
  }
  return p;
}

void scale_u(PolarPoint& p, double f) {
  for (auto& x : p.u) x *= f;
}

double log_uniform(StreamRng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

}  // namespace

std::vector<PolarPoint> sample_polar_cloud(const GroupParams& params, const PolarSampleSpec& spec) {
  std::vector<PolarPoint> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    StreamRng rng(spec.seed, 0x9017, i);
    const int region = static_cast<int>(i % 3);
    for (;;) {
      PolarPoint p = random_direction(params, rng);
      const double sgn = rng.uniform() < 0.5 ? -1.0 : 1.0;
      if (region == 0) {
        p.eta = sgn * (0.05 + (kTheta0 - 0.06) * rng.uniform());
        const double D = log_uniform(rng, 1.0, spec.max_distance);
        scale_u(p, D / (polar_U(params, p) * std::fabs(p.eta)));
      } else {
        const double gap = log_uniform(rng, region == 1 ? 5e-2 : 1e-3, kPi - kTheta0);
        p.eta = sgn * (kPi - gap);
        if (region == 1) {
          const double target = log_uniform(rng, 1.01 * kGamma0, 3.0 * kGamma0);
          scale_u(p, std::sqrt(target / region_gamma(params, p)));
        } else {
          const double D = log_uniform(rng, 1.0, spec.max_distance);
          scale_u(p, D / (polar_U(params, p) * std::fabs(p.eta)));
          const double gm = region_gamma(params, p);
          if (gm > kGamma0) scale_u(p, std::sqrt(0.99 * kGamma0 / gm));
        }
      }
      if (polar_ul2(params, p) == 0.0 || in_unit_ball(params, p)) continue;
      if (classify_region(params, p) != static_cast<Region>(region)) continue;
      out.push_back(std::move(p));
      break;
    }
  }
  return out;
}

std::vector<PolarPoint> sample_polar_points(const GroupParams& params, std::size_t count, std::uint64_t seed,
                                            double u_max) {
  std::vector<PolarPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    StreamRng rng(seed, 0x9018, i);
    PolarPoint p;
    p.u.resize(2 * static_cast<std::size_t>(params.n()));
    do {
      for (auto& x : p.u) x = u_max * (2.0 * rng.uniform() - 1.0);
    } while (polar_ul2(params, p) == 0.0);
    p.eta = (2.0 * rng.uniform() - 1.0) * kPi * (1.0 - 1e-9);
    if (p.eta == 0.0) p.eta = 0.5;
    out.push_back(std::move(p));
  }
  return out;
}

// --- Lemma 6 -----------------------------------------------------------------

Lemma6Value lemma6_ratio(const GroupParams& params, const PolarPoint& p, const QuadratureSpec& spec,
                         double rel_tol) {
  check_polar(params, p);
  Lemma6Value out;
  out.region = classify_region(params, p);
  const double ae = std::fabs(p.eta);
  auto log_pj = [&](double eta) {
    PolarPoint q{p.u, eta};
    return log_kernel(params, 1.0, psi(params, q), spec).log_value + log_jacobian(params, q);
  };
  const double base = log_pj(p.eta);
  const double vend = kPi / ae;
  int evals = 0;
  auto integrand = [&](double tau) {
    const double v = 1.0 + (vend - 1.0) * tau * tau * (3.0 - 2.0 * tau);
    const double eta = std::copysign(v * ae, p.eta);
    if (!(std::fabs(eta) < kPi)) return 0.0;
    ++evals;
    return std::exp(log_pj(eta) - base) * (vend - 1.0) * 6.0 * tau * (1.0 - tau);
  };
  const IntegralResult r = integrate_interval(integrand, 0.0, 1.0, rel_tol, 0.0, 400);
  if (!r.converged) throw QuadratureError("Lemma-6 integral did not converge");
  out.ratio = norm2(p.u) * p.eta * p.eta * r.value[0];
  out.integral_rel_error = r.error[0] / r.value[0];
  out.evaluations = evals;
  return out;
}

VerificationReport check_lemma6(const GroupParams& params, std::span<const PolarPoint> cloud,
                                const QuadratureSpec& spec) {
  VerificationReport rep;
  rep.id = "lemma6-ratio";
  rep.description = "|u|^2 eta^2 int_1^{pi/|eta|} pJ(u, v eta) dv / pJ(u, eta) over B^c";
  double sup[3] = {0.0, 0.0, 0.0};
  int count[3] = {0, 0, 0};
  const auto np = static_cast<std::ptrdiff_t>(cloud.size());
  std::vector<Lemma6Value> vals(cloud.size());
  std::vector<std::string> errors(cloud.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < np; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    try {
      vals[iu] = lemma6_ratio(params, cloud[iu], spec);
    } catch (const std::exception& e) {
      vals[iu].ratio = HUGE_VAL;
      vals[iu].region = classify_region(params, cloud[iu]);
      errors[iu] = e.what();
    }
  }
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const Lemma6Value& v = vals[i];
    if (!errors[i].empty()) rep.flags.push_back("point " + std::to_string(i) + ": " + errors[i]);
    const int r = static_cast<int>(v.region);
    sup[r] = std::max(sup[r], v.ratio);
    ++count[r];
    rep.left.push_back(v.ratio);
    rep.right.push_back(1.0);
  }
  rep.summarize_ratios();
  for (int r = 0; r < 3; ++r) {
    const std::string key = to_string(static_cast<Region>(r));
    rep.extra["count"][key] = count[r];
    rep.extra["sup"][key] = sup[r];
  }
  rep.judge_band();
  rep.pass = rep.pass && count[0] > 0 && count[1] > 0 && count[2] > 0;
  return rep;
}

// --- path and change of variables -------------------------------------------------

VerificationReport horizontal_path_check(const GroupParams& params, const PolarPoint& p, const SmoothFunction& f,
                                         int samples) {
  check_polar(params, p);
  VerificationReport rep;
  rep.id = "horizontal-path";
  rep.description = "d/ds f(Psi(u, s eta)): expansion vs finite differences, Cauchy-Schwarz bound, path speed";
  const int N = params.dim();
  const double U = polar_U(params, p);
  const double speed = U * std::fabs(p.eta);
  double worst_fd = 0.0, worst_speed = 0.0, worst_cs = 0.0;
  auto at = [&](double s) { return psi(params, PolarPoint{p.u, s * p.eta}); };
  std::vector<double> grad(static_cast<std::size_t>(N)), hor(2 * static_cast<std::size_t>(params.n()));
  for (int k = 0; k < samples; ++k) {
    const double s = (k + 0.5) / samples;
    const GroupPoint g = at(s);
    f.gradient(g.coords(), grad);
    horizontal_from_euclidean(params, Side::left, g.coords(), grad, hor);
    double expansion = 0.0, hnorm2 = 0.0;
    for (int m = 0; m < params.n(); ++m) {
      const double a = params.coef(m);
      const std::size_t i = 2 * static_cast<std::size_t>(m);
      const double sn = std::sin(2.0 * a * s * p.eta), cs = std::cos(2.0 * a * s * p.eta);
      const double xd = 2.0 * p.eta * a * (sn * p.u[i] - cs * p.u[i + 1]);
      const double yd = 2.0 * p.eta * a * (sn * p.u[i + 1] + cs * p.u[i]);
      expansion += xd * hor[i] + yd * hor[i + 1];
      hnorm2 += hor[i] * hor[i] + hor[i + 1] * hor[i + 1];
    }
    const double bound = speed * std::sqrt(hnorm2);
    const double del = 1e-5;
    const double fd = (f.value(at(s + del).coords()) - f.value(at(s - del).coords())) / (2.0 * del);
    const double dev_fd = std::fabs(fd - expansion) / (bound + 1e-12);
    const double cs_excess = std::max(0.0, std::fabs(expansion) - bound * (1.0 + 1e-12)) / (bound + 1e-300);

    // Richardson-extrapolated velocity of the path.
    auto vel = [&](double d) {
      const GroupPoint a = at(s + d), b = at(s - d);
      std::vector<double> v(static_cast<std::size_t>(N));
      for (int c = 0; c < N; ++c) v[static_cast<std::size_t>(c)] = (a[static_cast<std::size_t>(c)] - b[static_cast<std::size_t>(c)]) / (2.0 * d);
      return v;
    };
    const auto v1 = vel(1e-3), v2 = vel(5e-4);
    std::vector<double> v(v1.size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = (4.0 * v2[c] - v1[c]) / 3.0;
    double zs = 0.0;
    for (int c = 0; c + 1 < N; ++c) zs += v[static_cast<std::size_t>(c)] * v[static_cast<std::size_t>(c)];
    // Horizontal: t' must equal 2 sum a (y x' - x y').
    const double tdot = 2.0 * symplectic(params, g.coords(), v);
    const double dev_speed = std::max(std::fabs(std::sqrt(zs) - speed) / speed,
                                      std::fabs(v.back() - tdot) / (speed * (1.0 + std::sqrt(z_norm2(g.coords())))));
    worst_fd = std::max(worst_fd, dev_fd);
    worst_speed = std::max(worst_speed, dev_speed);
    worst_cs = std::max(worst_cs, cs_excess);
    rep.left.push_back(std::fabs(expansion));
    rep.right.push_back(bound);
  }
  const double d = distance(params, at(1.0));
  const double len_dev = std::fabs(d - speed) / speed;
  rep.extra["expansion_vs_fd"] = worst_fd;
  rep.extra["speed_deviation"] = worst_speed;
  rep.extra["cauchy_schwarz_excess"] = worst_cs;
  rep.extra["length_vs_distance"] = len_dev;
  rep.constant = std::max({worst_fd, worst_speed, len_dev});
  rep.min_ratio = 0.0;
  rep.max_ratio = rep.constant;
  rep.tolerance = 1e-8;
  rep.pass = worst_fd <= 1e-6 && worst_cs == 0.0 && worst_speed <= 1e-8 && len_dev <= 1e-8;
  return rep;
}

VerificationReport check_change_of_variables(const GroupParams& params, const TestFunction& F, std::size_t samples,
                                             std::uint64_t seed) {
  VerificationReport rep;
  rep.id = "change-of-variables";
  rep.description = "int F dm against importance-sampled int F(Psi(u,eta)) J du deta";
  rep.seed = seed;
  const auto ball = F.support();
  if (!ball) throw ParameterError("change of variables needs a compactly supported function");
  const int N = params.dim();
  const auto Nz = static_cast<std::size_t>(N);
  // Student-t proposal (4 degrees of freedom) around the preimage of the centre, shaped by
  // the inverse Jacobian; the heavy tails keep the weights bounded where Psi bends.
  GroupPoint c0(ball->center);
  const PolarPoint q0 = psi_inverse(params, c0);
  const Eigen::MatrixXd D = jacobian_matrix(params, q0);
  const Eigen::MatrixXd A = D.inverse() * ball->radius;
  const double nu = 4.0;
  const double log_norm = std::lgamma(0.5 * nu) - std::lgamma(0.5 * (nu + N)) + 0.5 * N * std::log(nu * kPi) +
                          std::log(std::fabs(A.determinant()));
  std::vector<double> vals(samples);
  Eigen::VectorXd xi(N), q(N);
  for (std::size_t i = 0; i < samples; ++i) {
    StreamRng rng(seed, 0xb0c6, i);
    for (int c = 0; c < N; ++c) xi(c) = rng.normal();
    const double chi2 = -2.0 * std::log(rng.uniform() * rng.uniform());
    xi *= std::sqrt(nu / chi2);
    q = A * xi;
    PolarPoint p;
    p.u.resize(Nz - 1);
    for (std::size_t c = 0; c + 1 < Nz; ++c) p.u[c] = q0.u[c] + q(static_cast<Eigen::Index>(c));
    p.eta = q0.eta + q(N - 1);
    vals[i] = 0.0;
    if (!(std::fabs(p.eta) > 0.0 && std::fabs(p.eta) < kPi) || polar_ul2(params, p) == 0.0) continue;
    const double fv = F.value(psi(params, p).coords());
    if (fv == 0.0) continue;
    vals[i] = fv * std::exp(log_jacobian(params, p) + 0.5 * (nu + N) * std::log1p(xi.squaredNorm() / nu) + log_norm);
  }
  const double mean = pairwise_sum(vals) / static_cast<double>(samples);
  std::vector<double> sq(samples);
  for (std::size_t i = 0; i < samples; ++i) sq[i] = (vals[i] - mean) * (vals[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(samples - 1);
  const double est = mean;
  const double se = std::sqrt(var / static_cast<double>(samples));
  const double exact = F.exact_integral();
  rep.left = {est};
  rep.right = {exact};
  rep.standard_errors = {se};
  rep.constant = std::fabs(est - exact) / se;
  rep.min_ratio = rep.max_ratio = est / exact;
  rep.tolerance = 3.0;
  rep.extra["z_score"] = rep.constant;
  rep.pass = rep.constant <= 3.0;
  return rep;
}

}  // namespace nhg
