#include "nhg/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "nhg/distance.hpp"
#include "nhg/errors.hpp"
#include "nhg/quadrature.hpp"
#include "nhg/root_finding.hpp"
#include "nhg/test_function.hpp"

namespace nhg {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

cd log_sinh(cd w) {
  if (w.real() > 1.0) return w - kLn2 + std::log(1.0 - std::exp(-2.0 * w));
  return std::log(std::sinh(w));
}

cd coth(cd w) {
  if (w.real() > 1.0) {
    const cd e = std::exp(-2.0 * w);
    return (1.0 + e) / (1.0 - e);
  }
  return std::cosh(w) / std::sinh(w);
}

struct BlockTerms {
  cd logq;   // log(w / sinh w)
  cd wcoth;  // w coth w
};

// w = a lambda.  When Im(w) lies in (pi/2, 3pi/2) the argument is moved by -i pi, where
// sinh w = -sinh w' and coth w = coth w'; the last block uses the exact gap.
BlockTerms block_terms(double a, bool last, cd lam, double gap) {
  const cd w = a * lam;
  const double y = w.imag();
  if (y > 0.5 * kPi && y < 1.5 * kPi) {
    const cd wp = last ? cd(lam.real(), -gap) : cd(w.real(), y - kPi);
    return {std::log(w) - (log_sinh(wp) + cd(0.0, kPi)), w * coth(wp)};
  }
  if (std::abs(w) < 1e-4) {
    const cd w2 = w * w;
    return {w2 * (-1.0 / 6.0 + w2 / 180.0), 1.0 + w2 * (1.0 / 3.0 - w2 / 45.0)};
  }
  return {std::log(w) - log_sinh(w), w * coth(w)};
}

// 1/x - cot x and 1/sin^2 x - 1/x^2 for 0 <= x < pi.
double g1(double x) {
  if (x < 1e-3) return x / 3.0 + x * x * x / 45.0;
  return 1.0 / x - 1.0 / std::tan(x);
}
double g2(double x) {
  if (x < 1e-3) return 1.0 / 3.0 + x * x / 15.0;
  const double s = std::sin(x);
  return 1.0 / (s * s) - 1.0 / (x * x);
}

struct Problem {
  const GroupParams* params;
  double h;
  std::vector<double> rho;
  double abs_t;
};

// dE/dsigma and d2E/dsigma2 at sigma = pi - gap (gap form) or sigma (direct form).
std::pair<double, double> saddle_eq(const Problem& P, double sigma, double gap, bool use_gap) {
  const GroupParams& params = *P.params;
  const int l = params.blocks();
  double d1 = -P.abs_t / (4.0 * P.h), d2 = 0.0;
  for (int j = 0; j < l; ++j) {
    const double a = params.a()[static_cast<std::size_t>(j)];
    const double r = P.rho[static_cast<std::size_t>(j)];
    const double k = params.k()[static_cast<std::size_t>(j)];
    if (use_gap && j == l - 1) {
      const double x = kPi - gap;
      const double sg = std::sin(gap);
      d1 += r * mu_near_pi(gap) / (4.0 * P.h) + k * (1.0 / x + std::cos(gap) / sg);
      d2 += r * mu_prime_near_pi(gap) / (4.0 * P.h) + k * (1.0 / (sg * sg) - 1.0 / (x * x));
    } else {
      const double x = a * sigma;
      d1 += r * a * mu(x) / (4.0 * P.h) + k * a * g1(x);
      d2 += r * a * a * mu_prime(x) / (4.0 * P.h) + k * a * a * g2(x);
    }
  }
  return {d1, d2};
}

// log F(lambda) for Re(lambda) >= 0, 0 <= Im(lambda); `gap` is pi - Im(lambda), passed
// separately so the last block keeps full accuracy next to the pole at i pi.
cd log_integrand_at(const Problem& P, cd lam, double gap, std::vector<cd>* wcoth) {
  const GroupParams& params = *P.params;
  const int l = params.blocks();
  cd acc(0.0, 0.0);
  cd quad = cd(0.0, 1.0) * lam * P.abs_t;
  for (int j = 0; j < l; ++j) {
    const double a = params.a()[static_cast<std::size_t>(j)];
    const BlockTerms bt = block_terms(a, j == l - 1, lam, gap);
    acc += static_cast<double>(params.k()[static_cast<std::size_t>(j)]) * bt.logq;
    quad -= P.rho[static_cast<std::size_t>(j)] * bt.wcoth;
    if (wcoth) (*wcoth)[static_cast<std::size_t>(j)] = bt.wcoth;
  }
  return acc + quad / (4.0 * P.h);
}

}  // namespace

std::pair<double, double> kernel_saddle(const GroupParams& params, double h, std::span<const double> rho,
                                        double abs_t) {
  if (abs_t == 0.0) return {0.0, kPi};
  Problem P{&params, h, std::vector<double>(rho.begin(), rho.end()), abs_t};
  const double mid = saddle_eq(P, 0.5 * kPi, 0.5 * kPi, false).first;
  if (mid >= 0.0) {
    auto f = [&](double x) { return saddle_eq(P, x, kPi - x, false); };
    const double s = solve_monotone(f, 0.0, 0.5 * kPi, 1e-10, 0.0, 120).x;
    return {s, kPi - s};
  }
  double e = 0.25 * kPi;
  while (e > 1e-300 && saddle_eq(P, kPi - e, e, true).first < 0.0) e *= 0.5;
  auto f = [&](double x) {
    auto [v, d] = saddle_eq(P, kPi - x, x, true);
    return std::pair{v, -d};
  };
  const double gap = solve_monotone(f, e, std::min(2.0 * e, 0.5 * kPi), 1e-10 * e, 0.0, 120).x;
  return {kPi - gap, gap};
}

KernelMoments kernel_moments(const GroupParams& params, double h, const GroupPoint& g, const QuadratureSpec& spec,
                             bool derivatives) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("heat kernel needs h > 0");
  check_shape(params, g.coords());
  Problem P{&params, h, block_norms(params, g.coords()), std::fabs(g.t())};
  const int l = params.blocks();
  const auto [sigma, gap] = kernel_saddle(params, h, P.rho, P.abs_t);
  const double e0 = log_integrand_at(P, cd(0.0, sigma), gap, nullptr).real();

  const double curv = saddle_eq(P, sigma, gap, sigma > 0.5 * kPi).second;
  const double width0 = 1.0 / std::sqrt(std::max(curv, 1e-300));
  double kappa = 0.0;
  for (int j = 0; j < l; ++j) {
    const double a = params.a()[static_cast<std::size_t>(j)];
    kappa += a * params.k()[static_cast<std::size_t>(j)] + P.rho[static_cast<std::size_t>(j)] * a / (4.0 * h);
  }
  const double period = P.abs_t > 0.0 ? 8.0 * kPi * h / P.abs_t : std::numeric_limits<double>::infinity();
  const double osc = period / spec.panels_per_period;

  HalfLineOptions opt;
  opt.initial_width = 0.5 * std::min({width0, gap, osc});
  opt.max_width = std::max(opt.initial_width, std::min(osc, 4.0 / kappa));
  opt.decay = kappa;
  opt.min_extent = 6.0 * width0;
  opt.rel_tol = spec.rel_tol;
  opt.panel_budget = spec.panel_budget;
  opt.max_extent = spec.max_lambda;

  // Switch point for the tilted ray: clear of the peak and of the essential
  // singularity of the last block at i pi.
  const double rho_l = P.rho.back();
  const double s1 = std::max({10.0 * width0, 4.0 * gap, kPi * rho_l / (4.0 * h)});
  const double extent = 40.0 / kappa;
  const bool use_ray = P.abs_t > 0.0 && s1 < extent && extent / osc > spec.ray_threshold;
  if (use_ray) opt.stop_at = s1;

  const int K = derivatives ? l + 2 : 1;
  auto fill = [&](cd lam, cd dl, double* out) {
    std::vector<cd> wc(static_cast<std::size_t>(l));
    const double sig = lam.imag();
    const double gp = sig > 0.5 * kPi ? gap + (sigma - sig) : kPi - sig;
    const cd G = std::exp(log_integrand_at(P, lam, gp, &wc) - e0) * dl;
    out[0] = G.real();
    if (!derivatives) return;
    for (int j = 0; j < l; ++j) out[1 + j] = (G * wc[static_cast<std::size_t>(j)]).real();
    out[1 + l] = (G * cd(0.0, 1.0) * lam).real();
  };
  VectorIntegrand f = [&, sigma = sigma](double s, double* out) { fill(cd(s, sigma), cd(1.0, 0.0), out); };
  IntegralResult r = integrate_half_line(f, K, opt);
  if (use_ray && r.converged) {
    const cd dir = std::polar(1.0, 0.25 * kPi);
    const cd base(s1, sigma);
    VectorIntegrand fr = [&](double q, double* out) { fill(base + q * dir, dir, out); };
    HalfLineOptions ro;
    ro.initial_width = 0.25 * s1;
    const double kr = P.abs_t * dir.imag() / (4.0 * h) + dir.real() * kappa;
    ro.decay = kr;
    ro.max_width = std::max(ro.initial_width, 4.0 / kr);
    ro.rel_tol = spec.rel_tol;
    ro.panel_budget = spec.panel_budget;
    ro.max_extent = spec.max_lambda;
    const IntegralResult rr = integrate_half_line(fr, K, ro);
    for (std::size_t k = 0; k < r.value.size(); ++k) {
      r.value[k] += rr.value[k];
      r.error[k] += rr.error[k];
      r.l1[k] += rr.l1[k];
    }
    r.panels += rr.panels;
    r.converged = rr.converged;
  }
  if (!r.converged) {
    std::ostringstream os;
    os << "kernel quadrature did not converge: h=" << h << " |t|=" << P.abs_t << " sigma=" << sigma
       << " panels=" << r.panels << " rel_err=" << (r.value.empty() ? 0.0 : r.error[0] / std::fabs(r.value[0]));
    throw QuadratureError(os.str());
  }
  KernelMoments m;
  m.m0 = r.value[0];
  if (!(m.m0 > 0.0)) throw ConditioningError("kernel integral is not positive");
  const double n = params.n();
  m.log_scale = -(n + 1.0) * std::log(4.0 * kPi * h) + e0;
  m.rel_error = r.error[0] / m.m0;
  m.sigma = sigma;
  m.panels = r.panels;
  m.ray = use_ray;
  if (derivatives) {
    m.block.assign(r.value.begin() + 1, r.value.begin() + 1 + l);
    m.mt = r.value[static_cast<std::size_t>(1 + l)];
  }
  return m;
}

KernelValue log_kernel(const GroupParams& params, double h, const GroupPoint& g, const QuadratureSpec& spec) {
  const KernelMoments m = kernel_moments(params, h, g, spec, false);
  KernelValue v;
  v.log_value = m.log_scale + std::log(m.m0);
  v.rel_error = m.rel_error;
  v.value = std::exp(v.log_value);
  v.error = v.value * v.rel_error;
  return v;
}

KernelValue kernel(const GroupParams& params, double h, const GroupPoint& g, const QuadratureSpec& spec) {
  KernelValue v = log_kernel(params, h, g, spec);
  if (!(v.value >= 1e-300)) throw ConditioningError("kernel value below the positivity floor 1e-300");
  return v;
}

std::vector<double> log_kernel_euclidean_gradient(const GroupParams& params, double h, const GroupPoint& g,
                                                  const QuadratureSpec& spec) {
  const KernelMoments m = kernel_moments(params, h, g, spec, true);
  std::vector<double> grad(g.size());
  for (int c = 0; c < params.n(); ++c) {
    const std::size_t i = 2 * static_cast<std::size_t>(c);
    const double q = m.block[static_cast<std::size_t>(params.block_of(c))] / (2.0 * h * m.m0);
    grad[i] = -g[i] * q;
    grad[i + 1] = -g[i + 1] * q;
  }
  const double t = g.t();
  grad.back() = t == 0.0 ? 0.0 : std::copysign(1.0, t) * m.mt / (4.0 * h * m.m0);
  return grad;
}

std::vector<double> log_kernel_left_gradient(const GroupParams& params, double h, const GroupPoint& g,
                                             const QuadratureSpec& spec) {
  const auto grad = log_kernel_euclidean_gradient(params, h, g, spec);
  std::vector<double> out(2 * static_cast<std::size_t>(params.n()));
  horizontal_from_euclidean(params, Side::left, g.coords(), grad, out);
  return out;
}

std::vector<double> log_kernel_right_gradient(const GroupParams& params, double h, const GroupPoint& g,
                                              const QuadratureSpec& spec) {
  const auto grad = log_kernel_euclidean_gradient(params, h, g, spec);
  std::vector<double> out(2 * static_cast<std::size_t>(params.n()));
  horizontal_from_euclidean(params, Side::right, g.coords(), grad, out);
  return out;
}

double log_kernel_t_derivative(const GroupParams& params, double h, const GroupPoint& g, const QuadratureSpec& spec) {
  return log_kernel_euclidean_gradient(params, h, g, spec).back();
}

// --- fixed-node table ----------------------------------------------------------

KernelTable::KernelTable(const GroupParams& params, double h, double t_max, double rho_max, double rel_tol)
    : params_(params), h_(h), t_max_(t_max) {
  if (!(h > 0.0)) throw DomainError("heat kernel needs h > 0");
  const int l = params.blocks();
  if (l > 64) throw ParameterError("kernel table supports at most 64 blocks");
  auto log_amp = [&](double s) {
    double v = 0.0;
    for (int j = 0; j < l; ++j) {
      const double x = params.a()[static_cast<std::size_t>(j)] * s;
      v += params.k()[static_cast<std::size_t>(j)] * (x < 1e-4 ? -x * x / 6.0 : std::log(x / std::sinh(x)));
    }
    return v;
  };
  double cutoff = 0.5;
  while (log_amp(cutoff) > std::log(rel_tol) - 4.0) cutoff += 0.5;
  // A 15-point panel comfortably resolves ~6 radians of cos(s t / 4h) and the
  // Gaussian-like factor exp(-rho s^2 / 12h) over 1.5 of its widths.
  double width = 2.0;
  if (t_max > 0.0) width = std::min(width, 24.0 * h / t_max);
  if (rho_max > 0.0) width = std::min(width, 1.5 * std::sqrt(12.0 * h / rho_max));
  const int panels = static_cast<int>(std::ceil(cutoff / width));
  const Rule base = gauss_legendre(15);
  const double pref = std::pow(4.0 * kPi * h, -(params.n() + 1.0));
  const double pw = cutoff / panels;
  for (int p = 0; p < panels; ++p) {
    for (std::size_t i = 0; i < base.x.size(); ++i) {
      const double s = p * pw + 0.5 * pw * (base.x[i] + 1.0);
      weight_.push_back(pref * 0.5 * pw * base.w[i] * std::exp(log_amp(s)));
      freq_.push_back(s / (4.0 * h));
      for (int j = 0; j < l; ++j) {
        const double x = params.a()[static_cast<std::size_t>(j)] * s;
        coth_.push_back((x < 1e-4 ? 1.0 + x * x / 3.0 : x / std::tanh(x)) / (4.0 * h));
      }
    }
  }
}

double KernelTable::operator()(std::span<const double> g) const {
  const int l = params_.blocks();
  const double t = g[g.size() - 1];
  if (std::fabs(t) > t_max_ * (1.0 + 1e-12)) throw ResolutionError("kernel table queried beyond its t range");
  double rho[64];
  for (int j = 0; j < l; ++j) rho[j] = block_norm2(params_, g, j);
  double acc = 0.0;
  const std::size_t L = static_cast<std::size_t>(l);
  for (std::size_t k = 0; k < freq_.size(); ++k) {
    double e = 0.0;
    for (std::size_t j = 0; j < L; ++j) e += rho[j] * coth_[k * L + j];
    acc += weight_[k] * std::cos(freq_[k] * t) * std::exp(-e);
  }
  return acc;
}

double KernelTable::gradient(std::span<const double> g, std::span<double> grad) const {
  const int l = params_.blocks();
  const double t = g[g.size() - 1];
  if (std::fabs(t) > t_max_ * (1.0 + 1e-12)) throw ResolutionError("kernel table queried beyond its t range");
  double rho[64], drho[64];
  for (int j = 0; j < l; ++j) {
    rho[j] = block_norm2(params_, g, j);
    drho[j] = 0.0;
  }
  const std::size_t L = static_cast<std::size_t>(l);
  double acc = 0.0, dt = 0.0;
  for (std::size_t k = 0; k < freq_.size(); ++k) {
    double e = 0.0;
    for (std::size_t j = 0; j < L; ++j) e += rho[j] * coth_[k * L + j];
    const double amp = weight_[k] * std::exp(-e);
    const double c = std::cos(freq_[k] * t);
    acc += amp * c;
    dt -= amp * freq_[k] * std::sin(freq_[k] * t);
    for (std::size_t j = 0; j < L; ++j) drho[j] -= amp * c * coth_[k * L + j];
  }
  for (int m = 0; m < params_.n(); ++m) {
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    const double d = drho[params_.block_of(m)];
    grad[i] = 2.0 * g[i] * d;
    grad[i + 1] = 2.0 * g[i + 1] * d;
  }
  grad[g.size() - 1] = dt;
  return acc;
}

void KernelTable::evaluate_serial(std::span<const double> points, std::span<double> out) const {
  const std::size_t d = static_cast<std::size_t>(params_.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(points.subspan(i * d, d));
}

void KernelTable::evaluate_parallel(std::span<const double> points, std::span<double> out) const {
  const std::size_t d = static_cast<std::size_t>(params_.dim());
  const auto N = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < N; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = (*this)(points.subspan(u * d, d));
  }
}

// --- checks --------------------------------------------------------------------

VerificationReport check_scaling(const GroupParams& params, double h, const GroupPoint& g,
                                 const QuadratureSpec& spec) {
  VerificationReport rep;
  rep.id = "kernel-scaling";
  rep.description = "h^{n+1} p_h(z,t) against p(z/sqrt h, t/h)";
  const KernelValue ph = log_kernel(params, h, g, spec);
  GroupPoint g1 = dilate(1.0 / std::sqrt(h), g);
  const KernelValue p1 = log_kernel(params, 1.0, g1, spec);
  const double dev = std::fabs(std::expm1(ph.log_value + (params.n() + 1.0) * std::log(h) - p1.log_value));
  rep.tolerance = std::max(10.0 * (ph.rel_error + p1.rel_error), 1e-13);
  rep.left = {dev};
  rep.right = {rep.tolerance};
  rep.constant = rep.max_ratio = rep.min_ratio = dev;
  rep.pass = dev <= rep.tolerance;
  return rep;
}

VerificationReport check_kernel_symmetry(const GroupParams& params, double h, std::span<const GroupPoint> points,
                                         const QuadratureSpec& spec) {
  VerificationReport rep;
  rep.id = "kernel-symmetry";
  rep.description = "inversion, reflections, x d_y p = y d_x p, conj(z)(Xr + i Yr)p = z(X - iY)p";
  rep.tolerance = 1e-8;
  double worst_refl = 0.0, worst_rot = 0.0, worst_conj = 0.0;
  for (const auto& g : points) {
    const double lp = log_kernel(params, h, g, spec).log_value;
    GroupPoint gt = g;
    gt.coords().back() = -g.t();
    GroupPoint gz = g;
    for (std::size_t i = 0; i + 1 < gz.size(); ++i) gz[i] = -g[i];
    double dev = 0.0;
    for (const auto* q : {&gt, &gz}) {
      dev = std::max(dev, std::fabs(std::expm1(log_kernel(params, h, *q, spec).log_value - lp)));
    }
    dev = std::max(dev, std::fabs(std::expm1(log_kernel(params, h, inverse(g), spec).log_value - lp)));
    worst_refl = std::max(worst_refl, dev);

    const auto grad = log_kernel_euclidean_gradient(params, h, g, spec);
    std::vector<double> L(2 * static_cast<std::size_t>(params.n())), R(L.size());
    horizontal_from_euclidean(params, Side::left, g.coords(), grad, L);
    horizontal_from_euclidean(params, Side::right, g.coords(), grad, R);
    double rot = 0.0, conj = 0.0;
    for (int m = 0; m < params.n(); ++m) {
      const std::size_t i = 2 * static_cast<std::size_t>(m);
      const double x = g[i], y = g[i + 1];
      const double lhs = x * grad[i + 1], rhs = y * grad[i];
      const double sc = std::fabs(lhs) + std::fabs(rhs);
      if (sc > 0.0) rot = std::max(rot, std::fabs(lhs - rhs) / sc);
      const cd z(x, y);
      const cd c1 = std::conj(z) * cd(R[i], R[i + 1]);
      const cd c2 = z * cd(L[i], -L[i + 1]);
      const double sc2 = std::abs(c1) + std::abs(c2);
      if (sc2 > 0.0) conj = std::max(conj, std::abs(c1 - c2) / sc2);
    }
    worst_rot = std::max(worst_rot, rot);
    worst_conj = std::max(worst_conj, conj);
    rep.left.push_back(std::max({dev, rot, conj}));
    rep.right.push_back(rep.tolerance);
  }
  rep.constant = std::max({worst_refl, worst_rot, worst_conj});
  rep.min_ratio = 0.0;
  rep.max_ratio = rep.constant;
  rep.extra["reflection_inversion"] = worst_refl;
  rep.extra["rotation_identity"] = worst_rot;
  rep.extra["conjugate_field_identity"] = worst_conj;
  rep.pass = !points.empty() && rep.constant <= rep.tolerance;
  return rep;
}

double lemma1_log_profile(const GroupParams& params, const GroupPoint& g) {
  const double z2 = z_norm2(g.coords());
  if (z2 == 0.0 && g.t() == 0.0) return 0.0;
  const double e = epsilon0(params, g);
  const double zl2 = block_norm2(params, g.coords(), params.blocks() - 1);
  const double zn = std::sqrt(z2);
  const double A = 1.0 + z2 * e * e + zl2 / e;
  const double B = (1.0 + zn + zl2 / (e * e)) / (1.0 + zn * e + zl2 / e);
  return -0.5 * std::log(A) + (params.k().back() - 1) * std::log(B) - distance_squared(params, g) / 4.0;
}

VerificationReport check_lemma1_estimate(const GroupParams& params, std::span<const GroupPoint> cloud,
                                         const QuadratureSpec& spec) {
  VerificationReport rep;
  rep.id = "lemma1-ratio";
  rep.description = "p(g) divided by the two-sided comparison profile, interior branch";
  for (const auto& g : cloud) {
    if (!(z_norm2(g.coords()) == 0.0 && g.t() == 0.0) &&
        solve_theta(params, g).branch == ThetaBranch::zl_zero_boundary) {
      ++rep.excluded;
      continue;
    }
    const double lp = log_kernel(params, 1.0, g, spec).log_value;
    rep.left.push_back(std::exp(lp - lemma1_log_profile(params, g)));
    rep.right.push_back(1.0);
  }
  if (rep.left.empty()) throw InsufficientDataError("every point of the Lemma-1 cloud was excluded");
  rep.summarize_ratios();
  rep.extra["spread"] = rep.max_ratio / rep.min_ratio;
  rep.judge_band();
  rep.pass = rep.pass && rep.min_ratio > 0.0;
  return rep;
}

std::pair<VerificationReport, VerificationReport> check_lemma2(const GroupParams& params,
                                                               std::span<const GroupPoint> cloud,
                                                               std::span<const double> hs,
                                                               const QuadratureSpec& spec) {
  VerificationReport rt, rg;
  rt.id = "lemma2-t";
  rt.description = "h |d_t log p_h|";
  rg.id = "lemma2-gradient";
  rg.description = "h |grad log p_h| / d(g)";
  for (const auto& g : cloud) {
    const double d = distance(params, g);
    if (d == 0.0) {
      ++rt.excluded;
      ++rg.excluded;
      continue;
    }
    for (double h : hs) {
      const auto grad = log_kernel_euclidean_gradient(params, h, g, spec);
      std::vector<double> L(2 * static_cast<std::size_t>(params.n()));
      horizontal_from_euclidean(params, Side::left, g.coords(), grad, L);
      double n2 = 0.0;
      for (double v : L) n2 += v * v;
      rt.left.push_back(h * std::fabs(grad.back()));
      rt.right.push_back(1.0);
      rg.left.push_back(h * std::sqrt(n2) / d);
      rg.right.push_back(1.0);
    }
  }
  for (auto* r : {&rt, &rg}) {
    r->summarize_ratios();
    r->judge_band();
  }
  return {rt, rg};
}

}  // namespace nhg
