#include "nhg/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nhg/distance.hpp"
#include "nhg/errors.hpp"
#include "nhg/quadrature.hpp"
#include "nhg/rng.hpp"
#include "nhg/root_finding.hpp"

namespace nhg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kPathStream = 0xd1ff;
constexpr std::uint64_t kBallStream = 0xba11;

Estimate mean_se(std::span<const double> v) {
  const auto n = static_cast<double>(v.size());
  Estimate e;
  if (v.empty()) return e;
  e.value = pairwise_sum(v) / n;
  if (v.size() < 2) return e;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - e.value) * (v[i] - e.value);
  e.se = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  return e;
}

// g . delta_r(w) into out.
void translate_dilated(const GroupParams& params, std::span<const double> g, std::span<const double> w, double r,
                       std::span<double> out) {
  const std::size_t last = out.size() - 1;
  double dt = 0.0;
  for (int m = 0; m < params.n(); ++m) {
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    dt += params.coef(m) * (g[i + 1] * w[i] - g[i] * w[i + 1]);
  }
  for (std::size_t i = 0; i < last; ++i) out[i] = g[i] + r * w[i];
  out[last] = g[last] + r * r * w[last] + 2.0 * r * dt;
}

GroupPoint horizontal_step(const GroupParams& params, int k, double eps) {
  GroupPoint e = GroupPoint::zeros(params.dim());
  e[static_cast<std::size_t>(k)] = eps;
  return e;
}

}  // namespace

// --- diffusion ------------------------------------------------------------------

void validate(const DiffusionSpec& spec) {
  if (spec.steps < 1) throw ParameterError("diffusion needs at least one step");
  if (spec.paths < 2) throw ParameterError("diffusion needs at least two paths");
}

namespace {

void sample_path(const GroupParams& params, double h, const DiffusionSpec& spec, std::size_t index,
                 std::span<double> out) {
  StreamRng rng(spec.seed, kPathStream, index);
  const double dt = h / spec.steps;
  const double sd = std::sqrt(2.0 * dt);
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t last = out.size() - 1;
  double t = 0.0;
  for (int s = 0; s < spec.steps; ++s) {
    for (int m = 0; m < params.n(); ++m) {
      const std::size_t i = 2 * static_cast<std::size_t>(m);
      const double a = params.coef(m);
      const double dx = sd * rng.normal(), dy = sd * rng.normal();
      // Trapezoid: 2a ((y + dy/2) dx - (x + dx/2) dy) = 2a (y dx - x dy).
      t += 2.0 * a * (out[i + 1] * dx - out[i] * dy);
      if (spec.levy == LevyRule::bridge) {
        // Area swept by the Brownian bridge about the chord: a logistic part (the
        // zero-endpoint bridge) plus a Gaussian coupling to the chord.  Together they
        // reproduce the per-step area variance exactly.
        const double u = rng.uniform();
        t += 4.0 * a * dt * std::log(u / (1.0 - u)) / kPi;
        t += 8.0 * a * std::sqrt((dx * dx + dy * dy) * dt / 24.0) * rng.normal();
      }
      out[i] += dx;
      out[i + 1] += dy;
    }
  }
  out[last] = t;
}

}  // namespace

GroupPoint sample_heat_point(const GroupParams& params, double h, const DiffusionSpec& spec, std::size_t index) {
  if (!(h > 0.0)) throw DomainError("diffusion time must be positive");
  validate(spec);
  GroupPoint g = GroupPoint::zeros(params.dim());
  sample_path(params, h, spec, index, g.coords());
  return g;
}

std::vector<double> sample_heat_points_serial(const GroupParams& params, double h, const DiffusionSpec& spec) {
  if (!(h > 0.0)) throw DomainError("diffusion time must be positive");
  validate(spec);
  const auto d = static_cast<std::size_t>(params.dim());
  std::vector<double> out(spec.paths * d);
  for (std::size_t i = 0; i < spec.paths; ++i) sample_path(params, h, spec, i, std::span<double>(out).subspan(i * d, d));
  return out;
}

std::vector<double> sample_heat_points_parallel(const GroupParams& params, double h, const DiffusionSpec& spec) {
  if (!(h > 0.0)) throw DomainError("diffusion time must be positive");
  validate(spec);
  const auto d = static_cast<std::size_t>(params.dim());
  std::vector<double> out(spec.paths * d);
  const auto N = static_cast<std::ptrdiff_t>(spec.paths);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < N; ++i) {
    const auto u = static_cast<std::size_t>(i);
    sample_path(params, h, spec, u, std::span<double>(out).subspan(u * d, d));
  }
  return out;
}

HeatSample::HeatSample(const GroupParams& params, const DiffusionSpec& spec, bool parallel)
    : params_(params), spec_(spec) {
  pts_ = parallel ? sample_heat_points_parallel(params, 1.0, spec) : sample_heat_points_serial(params, 1.0, spec);
}

const std::vector<double>& HeatSample::distances() const {
  if (dist_.size() == size()) return dist_;
  std::vector<double> d(size());
  const auto N = static_cast<std::ptrdiff_t>(size());
  const auto dim = static_cast<std::size_t>(params_.dim());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < N; ++i) {
    const auto u = static_cast<std::size_t>(i);
    GroupPoint g(std::vector<double>(pts_.begin() + static_cast<std::ptrdiff_t>(u * dim),
                                     pts_.begin() + static_cast<std::ptrdiff_t>((u + 1) * dim)));
    d[u] = distance(params_, g);
  }
  dist_ = std::move(d);
  return dist_;
}

Estimate mc_expectation(const HeatSample& sample, double h, const GroupPoint& g,
                        const std::function<double(std::span<const double>)>& F) {
  if (!(h > 0.0)) throw DomainError("semigroup time must be positive");
  const GroupParams& params = sample.params();
  check_shape(params, g.coords());
  const double r = std::sqrt(h);
  const auto d = static_cast<std::size_t>(params.dim());
  std::vector<double> vals(sample.size());
  const auto N = static_cast<std::ptrdiff_t>(sample.size());
#pragma omp parallel
  {
    std::vector<double> q(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < N; ++i) {
      const auto u = static_cast<std::size_t>(i);
      translate_dilated(params, g.coords(), sample.point(u), r, q);
      vals[u] = F(q);
    }
  }
  return mean_se(vals);
}

Estimate semigroup_mc(const HeatSample& sample, const SmoothFunction& f, double h, const GroupPoint& g) {
  return mc_expectation(sample, h, g, [&](std::span<const double> q) { return f.value(q); });
}

namespace {

// Pathwise field derivatives of f(g . W) for one endpoint; out has 2n entries.
void pathwise_gradient(const GroupParams& params, const SmoothFunction& f, std::span<const double> g,
                       std::span<const double> w, std::span<const double> q, Side side, std::span<double> grad,
                       std::span<double> tan, std::span<double> out) {
  f.gradient(q, grad);
  if (side == Side::right) {
    horizontal_from_euclidean(params, Side::right, q, grad, out);
    return;
  }
  const auto n2 = 2 * static_cast<std::size_t>(params.n());
  std::vector<double> e(n2, 0.0);
  for (std::size_t k = 0; k < n2; ++k) {
    e[k] = 1.0;
    tangent(params, g, e, w, tan);
    e[k] = 0.0;
    double s = 0.0;
    for (std::size_t c = 0; c < grad.size(); ++c) s += grad[c] * tan[c];
    out[k] = s;
  }
}

void norm_with_se(std::span<const double> m, std::span<const double> se, double& norm, double& norm_se) {
  double n2 = 0.0;
  for (double v : m) n2 += v * v;
  norm = std::sqrt(n2);
  double v = 0.0;
  if (norm > 0.0) {
    for (std::size_t k = 0; k < m.size(); ++k) v += (m[k] / norm) * (m[k] / norm) * se[k] * se[k];
    norm_se = std::sqrt(v);
  } else {
    for (double s : se) v += s * s;
    norm_se = std::sqrt(v);
  }
}

bool outside_support(const std::optional<Ball>& ball, std::span<const double> q) {
  if (!ball) return false;
  double r2 = 0.0;
  for (std::size_t c = 0; c < q.size(); ++c) {
    const double d = q[c] - ball->center[c];
    r2 += d * d;
  }
  return r2 >= ball->radius * ball->radius;
}

}  // namespace

GradientEstimate grad_semigroup_mc(const HeatSample& sample, const SmoothFunction& f, double h, const GroupPoint& g,
                                   Side side) {
  if (!(h > 0.0)) throw DomainError("semigroup time must be positive");
  const GroupParams& params = sample.params();
  check_shape(params, g.coords());
  const double r = std::sqrt(h);
  const auto d = static_cast<std::size_t>(params.dim());
  const auto n2 = 2 * static_cast<std::size_t>(params.n());
  const std::size_t N = sample.size();
  const auto ball = f.support();
  std::vector<double> vals(N * n2, 0.0);
  const auto NN = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel
  {
    std::vector<double> q(d), w(d), grad(d), tan(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < NN; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const auto W = sample.point(u);
      for (std::size_t c = 0; c + 1 < d; ++c) w[c] = r * W[c];
      w[d - 1] = h * W[d - 1];
      translate_dilated(params, g.coords(), W, r, q);
      if (outside_support(ball, q)) continue;
      pathwise_gradient(params, f, g.coords(), w, q, side, grad, tan, std::span<double>(vals).subspan(u * n2, n2));
    }
  }
  GradientEstimate out;
  std::vector<double> col(N);
  for (std::size_t k = 0; k < n2; ++k) {
    for (std::size_t i = 0; i < N; ++i) col[i] = vals[i * n2 + k];
    const Estimate e = mean_se(col);
    out.components.push_back(e.value);
    out.se.push_back(e.se);
  }
  norm_with_se(out.components, out.se, out.norm, out.norm_se);
  return out;
}

// --- quadrature ------------------------------------------------------------------

namespace {

using PointMap = std::function<void(std::span<const double> w, std::span<double> v)>;
using Integrand = std::function<double(std::span<const double> w, std::span<const double> v, const KernelTable& p)>;

/// sum_i weight_i * integrand(w_i, v_i, table) over a ball rule on `ball`, with v_i = map(w_i)
/// and the table sized for the v_i.
double integrate_ball(const GroupParams& params, const Ball& ball, double h, const GridSpec& grid,
                      const PointMap& map, const Integrand& integrand) {
  const int dim = params.dim();
  const auto d = static_cast<std::size_t>(dim);
  const double need = 0.5 * ball.radius * 8.0 / grid.angular;
  if (std::sqrt(h) < need) throw ResolutionError("kernel too narrow for the convolution grid; raise GridSpec::angular");
  const BallRule rule = ball_rule(dim, ball.radius, grid.radial, grid.angular);
  const std::size_t np = rule.weights.size();
  std::vector<double> W(np * d), V(np * d);
  double tmax = 0.0, rmax = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t c = 0; c < d; ++c) W[i * d + c] = ball.center[c] + rule.points[i * d + c];
    map(std::span<const double>(W).subspan(i * d, d), std::span<double>(V).subspan(i * d, d));
    tmax = std::max(tmax, std::fabs(V[i * d + d - 1]));
    rmax = std::max(rmax, z_norm2(std::span<const double>(V).subspan(i * d, d)));
  }
  const KernelTable table(params, h, tmax * (1.0 + 1e-9) + 1e-12, rmax, grid.kernel_tol);
  std::vector<double> vals(np);
  const auto N = static_cast<std::ptrdiff_t>(np);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < N; ++i) {
    const auto u = static_cast<std::size_t>(i);
    vals[u] = rule.weights[u] * integrand(std::span<const double>(W).subspan(u * d, d),
                                          std::span<const double>(V).subspan(u * d, d), table);
  }
  return pairwise_sum(vals);
}

Ball support_ball(const SmoothFunction& f) {
  const auto b = f.support();
  if (!b) throw CapabilityError("quadrature needs a compactly supported function");
  return *b;
}

// v = g^{-1} . w
PointMap left_translate_map(const GroupParams& params, const GroupPoint& g) {
  GroupPoint gi = inverse(g);
  return [&params, gi](std::span<const double> w, std::span<double> v) { multiply_into(params, gi.coords(), w, v); };
}

}  // namespace

double convolve_quadrature(const GroupParams& params, const SmoothFunction& support_of, double h, const GroupPoint& g,
                           const std::function<double(std::span<const double>)>& F, const GridSpec& grid) {
  if (!(h > 0.0)) throw DomainError("semigroup time must be positive");
  check_shape(params, g.coords());
  return integrate_ball(params, support_ball(support_of), h, grid, left_translate_map(params, g),
                        [&](std::span<const double> w, std::span<const double> v, const KernelTable& p) {
                          const double fv = F(w);
                          return fv == 0.0 ? 0.0 : fv * p(v);
                        });
}

double semigroup_quadrature(const GroupParams& params, const SmoothFunction& f, double h, const GroupPoint& g,
                            const GridSpec& grid) {
  return convolve_quadrature(params, f, h, g, [&](std::span<const double> w) { return f.value(w); }, grid);
}

std::vector<double> grad_semigroup_fd(const GroupParams& params, const SmoothFunction& f, double h,
                                      const GroupPoint& g, Side side, const GridSpec& grid, double eps) {
  std::vector<double> out;
  for (int k = 0; k < 2 * params.n(); ++k) {
    const GroupPoint ep = horizontal_step(params, k, eps), em = horizontal_step(params, k, -eps);
    const GroupPoint gp = side == Side::left ? multiply(params, g, ep) : multiply(params, ep, g);
    const GroupPoint gm = side == Side::left ? multiply(params, g, em) : multiply(params, em, g);
    out.push_back((semigroup_quadrature(params, f, h, gp, grid) - semigroup_quadrature(params, f, h, gm, grid)) /
                  (2.0 * eps));
  }
  return out;
}

double semigroup_apply(const GroupParams& params, const SmoothFunction& f, double h, const GroupPoint& g, Method method,
                       const SemigroupSpec& spec) {
  if (method == Method::quadrature) return semigroup_quadrature(params, f, h, g, spec.grid);
  const HeatSample sample(params, spec.diffusion);
  return semigroup_mc(sample, f, h, g).value;
}

double grad_semigroup(const GroupParams& params, const SmoothFunction& f, double h, const GroupPoint& g,
                      const SemigroupSpec& spec) {
  const HeatSample sample(params, spec.diffusion);
  return grad_semigroup_mc(sample, f, h, g).norm;
}

// --- family sweeps ---------------------------------------------------------------

namespace {

SweepRow sweep_one(const HeatSample& sample, const TestFunction& f, const GroupPoint& g, double h) {
  const GroupParams& params = sample.params();
  const double r = std::sqrt(h);
  const auto d = static_cast<std::size_t>(params.dim());
  const auto n2 = 2 * static_cast<std::size_t>(params.n());
  const std::size_t N = sample.size();
  const auto ball = f.support();
  std::vector<double> val(N, 0.0), gabs(N, 0.0), gsq(N, 0.0), fsq(N, 0.0), ent(N, 0.0), pg(N * n2, 0.0);
  std::vector<double> q(d), w(d), grad(d), tan(d), hor(n2);
  for (std::size_t i = 0; i < N; ++i) {
    const auto W = sample.point(i);
    translate_dilated(params, g.coords(), W, r, q);
    if (outside_support(ball, q)) continue;
    for (std::size_t c = 0; c + 1 < d; ++c) w[c] = r * W[c];
    w[d - 1] = h * W[d - 1];
    const double fv = f.gradient(q, grad);
    horizontal_from_euclidean(params, Side::left, q, grad, hor);
    double h2 = 0.0;
    for (double x : hor) h2 += x * x;
    val[i] = fv;
    gabs[i] = std::sqrt(h2);
    gsq[i] = h2;
    fsq[i] = fv * fv;
    ent[i] = fv == 0.0 ? 0.0 : fv * fv * std::log(fv * fv);
    std::vector<double> e(n2, 0.0);
    for (std::size_t k = 0; k < n2; ++k) {
      e[k] = 1.0;
      tangent(params, g.coords(), e, w, tan);
      e[k] = 0.0;
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += grad[c] * tan[c];
      pg[i * n2 + k] = s;
    }
  }
  SweepRow row;
  row.h = h;
  row.value = mean_se(val);
  row.grad_abs = mean_se(gabs);
  row.grad_sq = mean_se(gsq);
  row.f_sq = mean_se(fsq);
  row.entropy = mean_se(ent);
  std::vector<double> col(N), m(n2), se(n2);
  for (std::size_t k = 0; k < n2; ++k) {
    for (std::size_t i = 0; i < N; ++i) col[i] = pg[i * n2 + k];
    const Estimate e = mean_se(col);
    m[k] = e.value;
    se[k] = e.se;
  }
  norm_with_se(m, se, row.grad_norm, row.grad_norm_se);
  row.variance_numerator = row.f_sq.value - row.value.value * row.value.value;
  row.entropy_numerator =
      row.f_sq.value > 0.0 ? row.entropy.value - row.f_sq.value * std::log(row.f_sq.value) : 0.0;
  return row;
}

}  // namespace

bool below_floor(const Estimate& e) { return !(e.value > 0.0) || e.value <= 10.0 * e.se; }

std::vector<SweepRow> sweep_family(const HeatSample& sample, std::span<const TestFunction> family,
                                   std::span<const GroupPoint> points, std::span<const double> hs) {
  for (double h : hs)
    if (!(h > 0.0)) throw DomainError("semigroup time must be positive");
  const std::size_t nf = family.size(), ng = points.size(), nh = hs.size();
  std::vector<SweepRow> rows(nf * ng * nh);
  const auto total = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
    const auto u = static_cast<std::size_t>(idx);
    const std::size_t fi = u / (ng * nh), gi = (u / nh) % ng, hi = u % nh;
    rows[u] = sweep_one(sample, family[fi], points[gi], hs[hi]);
    rows[u].f_index = fi;
    rows[u].g_index = gi;
  }
  return rows;
}

namespace {

void record_argmax(VerificationReport& rep, std::span<const SweepRow> kept) {
  if (rep.left.empty()) return;
  std::size_t best = 0;
  for (std::size_t i = 1; i < rep.left.size(); ++i)
    if (rep.left[i] / rep.right[i] > rep.left[best] / rep.right[best]) best = i;
  rep.extra["argmax"] = {{"f", kept[best].f_index}, {"g", kept[best].g_index}, {"h", kept[best].h}};
}

}  // namespace

VerificationReport check_li_inequality(std::span<const SweepRow> rows) {
  VerificationReport rep;
  rep.id = "li-inequality";
  rep.description = "|grad e^{h Delta} f|(g) / e^{h Delta}(|grad f|)(g) over family x points x h";
  std::vector<SweepRow> kept;
  for (const auto& r : rows) {
    if (below_floor(r.grad_abs)) {
      ++rep.excluded;
      continue;
    }
    kept.push_back(r);
    rep.left.push_back(r.grad_norm);
    rep.right.push_back(r.grad_abs.value);
    const double ratio = r.grad_norm / r.grad_abs.value;
    rep.standard_errors.push_back(ratio * std::hypot(r.grad_norm_se / std::max(r.grad_norm, 1e-300),
                                                     r.grad_abs.se / r.grad_abs.value));
  }
  if (kept.empty()) throw InsufficientDataError("every Li-inequality sample fell under the noise floor");
  rep.summarize_ratios();
  record_argmax(rep, kept);
  rep.judge_band();
  return rep;
}

VerificationReport check_li_inequality(const HeatSample& sample, std::span<const TestFunction> family,
                                       std::span<const GroupPoint> points, std::span<const double> hs) {
  const auto rows = sweep_family(sample, family, points, hs);
  return check_li_inequality(rows);
}

std::pair<VerificationReport, VerificationReport> check_log_sobolev_poincare(std::span<const SweepRow> rows) {
  VerificationReport lse, poe;
  lse.id = "log-sobolev";
  lse.description = "[e(f^2 log f^2) - e(f^2) log e(f^2)] / [h e(|grad f|^2)], e = e^{h Delta}";
  poe.id = "poincare";
  poe.description = "[e(f^2) - e(f)^2] / [h e(|grad f|^2)], e = e^{h Delta}";
  std::vector<SweepRow> kl, kp;
  for (const auto& r : rows) {
    if (below_floor(r.grad_sq) || !(r.f_sq.value > 0.0)) {
      ++lse.excluded;
      ++poe.excluded;
      continue;
    }
    const double den = r.h * r.grad_sq.value;
    lse.left.push_back(r.entropy_numerator);
    lse.right.push_back(den);
    kl.push_back(r);
    poe.left.push_back(r.variance_numerator);
    poe.right.push_back(den);
    kp.push_back(r);
  }
  if (kl.empty()) throw InsufficientDataError("every log-Sobolev sample fell under the noise floor");
  for (auto* rep : {&lse, &poe}) rep->summarize_ratios();
  record_argmax(lse, kl);
  record_argmax(poe, kp);
  for (auto* rep : {&lse, &poe}) rep->judge_band();
  return {lse, poe};
}

VerificationReport check_holder_corollary(std::span<const SweepRow> rows, double K) {
  VerificationReport rep;
  rep.id = "holder-corollary";
  rep.description = "|grad e^{h Delta} f| <= K e(|grad f|) <= K e(|grad f|^2)^{1/2}, within 3 SE";
  std::size_t jensen_fail = 0, chain_fail = 0;
  double worst = 0.0;
  for (const auto& r : rows) {
    if (below_floor(r.grad_abs) || below_floor(r.grad_sq)) {
      ++rep.excluded;
      continue;
    }
    const double root = std::sqrt(r.grad_sq.value);
    const double root_se = r.grad_sq.se / (2.0 * root);
    const double lhs = r.grad_norm, rhs = K * root;
    const double se = r.grad_norm_se + K * root_se;
    if (lhs > rhs + 3.0 * se) ++chain_fail;
    if (r.grad_abs.value > root + 3.0 * (r.grad_abs.se + root_se)) ++jensen_fail;
    worst = std::max(worst, lhs / rhs);
    rep.left.push_back(lhs);
    rep.right.push_back(rhs);
    rep.standard_errors.push_back(se);
  }
  if (rep.left.empty()) throw InsufficientDataError("every Hoelder sample fell under the noise floor");
  rep.summarize_ratios();
  rep.extra["K"] = K;
  rep.extra["chain_failures"] = chain_fail;
  rep.extra["jensen_failures"] = jensen_fail;
  rep.tolerance = 3.0;
  rep.pass = chain_fail == 0 && jensen_fail == 0 && std::isfinite(worst);
  return rep;
}

// --- identities ------------------------------------------------------------------

VerificationReport check_commutation(const GroupParams& params, const TestFunction& f, double h, const GroupPoint& g,
                                     const HeatSample& sample, const GridSpec& grid) {
  VerificationReport rep;
  rep.id = "commutation";
  rep.description = "X-hat e^{h Delta} f against e^{h Delta} X-hat f";
  rep.tolerance = 1e-3;
  const auto lhs = grad_semigroup_fd(params, f, h, g, Side::right, grid);
  const GradientEstimate mc = grad_semigroup_mc(sample, f, h, g, Side::right);
  const int n2 = 2 * params.n();
  std::vector<double> rhs(static_cast<std::size_t>(n2));
  double scale = 0.0;
  for (int k = 0; k < n2; ++k) {
    const FieldIndex fi{k / 2, k % 2};
    rhs[static_cast<std::size_t>(k)] = convolve_quadrature(
        params, f, h, g, [&](std::span<const double> w) { return apply_right_field(params, fi, f, GroupPoint({w.begin(), w.end()})); },
        grid);
    scale = std::max({scale, std::fabs(lhs[static_cast<std::size_t>(k)]), std::fabs(rhs[static_cast<std::size_t>(k)])});
  }
  double worst = 0.0, worst_z = 0.0;
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    worst = std::max(worst, std::fabs(lhs[k] - rhs[k]) / std::max(scale, 1e-300));
    worst_z = std::max(worst_z, std::fabs(mc.components[k] - rhs[k]) / std::max(mc.se[k], 1e-300));
    rep.left.push_back(lhs[k]);
    rep.right.push_back(rhs[k]);
    rep.standard_errors.push_back(mc.se[k]);
  }
  rep.constant = worst;
  rep.max_ratio = worst;
  rep.extra["mc_components"] = mc.components;
  rep.extra["mc_max_z"] = worst_z;
  rep.pass = scale == 0.0 ? true : (worst <= rep.tolerance && worst_z <= 3.0);
  return rep;
}

VerificationReport check_integration_by_parts(const GroupParams& params, const TestFunction& f, double h,
                                              const GridSpec& grid) {
  VerificationReport rep;
  rep.id = "integration-by-parts";
  rep.description = "int (X f) p_h dm against -int f (X p_h) dm, left and right fields";
  rep.tolerance = 1e-3;
  const Ball ball = support_ball(f);
  const GroupPoint o = origin(params);
  const auto map = left_translate_map(params, o);
  const int n2 = 2 * params.n();
  const auto d = static_cast<std::size_t>(params.dim());
  double worst = 0.0;
  for (Side side : {Side::left, Side::right}) {
    for (int k = 0; k < n2; ++k) {
      auto field_of = [&, k](std::span<const double> w, std::span<const double> grad) {
        std::vector<double> hor(static_cast<std::size_t>(n2));
        horizontal_from_euclidean(params, side, w, grad, hor);
        return hor[static_cast<std::size_t>(k)];
      };
      const double L = integrate_ball(params, ball, h, grid, map,
                                      [&](std::span<const double> w, std::span<const double> v, const KernelTable& p) {
                                        std::vector<double> gf(d);
                                        f.gradient(w, gf);
                                        const double xf = field_of(w, gf);
                                        return xf == 0.0 ? 0.0 : xf * p(v);
                                      });
      const double A = integrate_ball(params, ball, h, grid, map,
                                      [&](std::span<const double> w, std::span<const double> v, const KernelTable& p) {
                                        std::vector<double> gf(d);
                                        f.gradient(w, gf);
                                        return std::fabs(field_of(w, gf)) * p(v);
                                      });
      const double R = integrate_ball(params, ball, h, grid, map,
                                      [&](std::span<const double> w, std::span<const double> v, const KernelTable& p) {
                                        const double fv = f.value(w);
                                        if (fv == 0.0) return 0.0;
                                        std::vector<double> gp(d);
                                        p.gradient(v, gp);
                                        return -fv * field_of(w, gp);
                                      });
      const double dev = A > 0.0 ? std::fabs(L - R) / A : std::fabs(L - R);
      worst = std::max(worst, dev);
      rep.left.push_back(L);
      rep.right.push_back(R);
    }
  }
  rep.constant = rep.max_ratio = worst;
  rep.pass = worst <= rep.tolerance;
  return rep;
}

VerificationReport check_translation_dilation_reduction(const GroupParams& params, const TestFunction& f, double h,
                                                        const GroupPoint& g, const GridSpec& grid) {
  if (!(h > 0.0)) throw DomainError("semigroup time must be positive");
  VerificationReport rep;
  rep.id = "translation-dilation";
  rep.description = "e^{h Delta} f(g) = e^{Delta} f_{g,h}(0) and |grad e^{h Delta} f(g)| = h^{-1/2} |grad e^{Delta} f_{g,h}(0)|";
  rep.tolerance = 1e-3;
  const Ball ball = support_ball(f);
  const double r = std::sqrt(h);
  const double jac = std::pow(h, -(params.n() + 1.0));
  const AffinePullback fgh = translate_dilate(params, f, g, r);
  const GroupPoint gi = inverse(g);
  const auto d = static_cast<std::size_t>(params.dim());

  const double lhs = semigroup_quadrature(params, f, h, g, grid);
  // w' = delta_{1/sqrt h}(g^{-1} w) = exp(-eE) . delta_{1/sqrt h}(g^{-1} w) at e = 0.
  auto reduced_map = [&](const GroupPoint& shift) {
    return PointMap([&, shift](std::span<const double> w, std::span<double> v) {
      std::vector<double> tmp(d);
      multiply_into(params, gi.coords(), w, tmp);
      for (std::size_t c = 0; c + 1 < d; ++c) tmp[c] /= r;
      tmp[d - 1] /= h;
      multiply_into(params, shift.coords(), tmp, v);
    });
  };
  const double rhs = jac * integrate_ball(params, ball, 1.0, grid, reduced_map(origin(params)),
                                          [&](std::span<const double>, std::span<const double> v, const KernelTable& p) {
                                            const double fv = fgh.value(v);
                                            return fv == 0.0 ? 0.0 : fv * p(v);
                                          });
  const auto gl = grad_semigroup_fd(params, f, h, g, Side::left, grid);
  const double eps = 1e-3;
  std::vector<double> gr;
  for (int k = 0; k < 2 * params.n(); ++k) {
    auto side_value = [&](double e) {
      return jac * integrate_ball(params, ball, 1.0, grid, reduced_map(horizontal_step(params, k, -e)),
                                  [&](std::span<const double> w, std::span<const double> v, const KernelTable& p) {
                                    const double fv = f.value(w);
                                    return fv == 0.0 ? 0.0 : fv * p(v);
                                  });
    };
    gr.push_back((side_value(eps) - side_value(-eps)) / (2.0 * eps) / r);
  }
  double nl = 0.0, nr = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < gl.size(); ++k) {
    nl += gl[k] * gl[k];
    nr += gr[k] * gr[k];
    diff += (gl[k] - gr[k]) * (gl[k] - gr[k]);
  }
  nl = std::sqrt(nl);
  nr = std::sqrt(nr);
  const double dev_value = std::fabs(lhs - rhs) / std::max(std::fabs(lhs), 1e-300);
  const double dev_grad = std::sqrt(diff) / std::max(nl, 1e-300);
  rep.left = {lhs, nl};
  rep.right = {rhs, nr};
  rep.extra["value_deviation"] = dev_value;
  rep.extra["gradient_deviation"] = dev_grad;
  rep.constant = rep.max_ratio = std::max(dev_value, dev_grad);
  rep.pass = (lhs == 0.0 && rhs == 0.0) || rep.constant <= rep.tolerance;
  return rep;
}

VerificationReport check_markov(const GroupParams& params, const HeatSample& sample, std::span<const GroupPoint> points,
                                std::span<const double> hs, const GridSpec& grid) {
  VerificationReport rep;
  rep.id = "markov";
  rep.description = "int p_h(z,t) dt against the Gaussian marginal; Monte Carlo against quadrature for a wide bump";
  rep.tolerance = 3.0;
  const int n = params.n();
  double worst_marginal = 0.0, worst_z = 0.0;
  QuadratureSpec qs;
  qs.rel_tol = 1e-10;
  for (double h : hs) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      const GroupPoint& g = points[i];
      if (i < 4) {
        GroupPoint q = g;
        auto integrand = [&](double s) {
          q[q.size() - 1] = 4.0 * h * s;
          return kernel(params, h, q, qs).value;
        };
        const IntegralResult r = integrate_interval(integrand, 0.0, 12.0, 1e-9, 0.0, 400);
        const double marginal = 2.0 * 4.0 * h * r.value[0];
        const double gauss = std::pow(4.0 * kPi * h, -n) * std::exp(-z_norm2(g.coords()) / (4.0 * h));
        worst_marginal = std::max(worst_marginal, std::fabs(marginal / gauss - 1.0));
      }
      // Widest bump the ball rule still resolves at this h.
      const TestFunction wide(std::vector<double>(g.coords().begin(), g.coords().end()),
                              std::sqrt(h) * grid.angular / 4.0,
                              {{1.0, std::vector<int>(static_cast<std::size_t>(params.dim()), 0)}});
      const Estimate mc = semigroup_mc(sample, wide, h, g);
      const double q = semigroup_quadrature(params, wide, h, g, grid);
      const double z = std::fabs(mc.value - q) / std::max(mc.se, 1e-300);
      worst_z = std::max(worst_z, z);
      rep.left.push_back(mc.value);
      rep.right.push_back(q);
      rep.standard_errors.push_back(mc.se);
    }
  }
  rep.extra["marginal_max_rel_deviation"] = worst_marginal;
  rep.extra["max_z"] = worst_z;
  rep.constant = rep.max_ratio = worst_z;
  rep.pass = worst_marginal <= 1e-6 && worst_z <= 3.0;
  return rep;
}

VerificationReport check_semigroup_property(const GroupParams& params, const HeatSample& sample, const TestFunction& f,
                                            double h1, double h2, std::span<const GroupPoint> points,
                                            const GridSpec& grid) {
  if (!(h1 > 0.0 && h2 > 0.0)) throw DomainError("semigroup times must be positive");
  VerificationReport rep;
  rep.id = "semigroup-property";
  rep.description = "p_{h1+h2}(g) = E p_{h2}(V^{-1} g), and two-stage Monte Carlo of f against one-stage quadrature";
  rep.tolerance = 3.0;
  const auto d = static_cast<std::size_t>(params.dim());
  const std::size_t N = sample.size();
  const double r1 = std::sqrt(h1);
  DiffusionSpec second = sample.spec();
  second.seed = sample.spec().seed ^ 0x5a5a5a5a5a5a5a5aULL;
  const HeatSample other(params, second);
  const double r2 = std::sqrt(h2);
  // Plain bump at the centre of f, as wide as the ball rule resolves at h1 + h2, so the
  // Monte-Carlo mean is not a rare-event estimate.
  const TestFunction bump(f.center(), std::sqrt(h1 + h2) * grid.angular / 4.0, {{1.0, std::vector<int>(d, 0)}});
  double worst = 0.0;
  for (const auto& g : points) {
    // Kernel: V_i^{-1} g for all paths.
    std::vector<double> arg(N * d);
    double tmax = 0.0, rmax = 0.0;
    std::vector<double> v(d);
    for (std::size_t i = 0; i < N; ++i) {
      const auto W = sample.point(i);
      for (std::size_t c = 0; c + 1 < d; ++c) v[c] = -r1 * W[c];
      v[d - 1] = -h1 * W[d - 1];
      multiply_into(params, v, g.coords(), std::span<double>(arg).subspan(i * d, d));
      tmax = std::max(tmax, std::fabs(arg[i * d + d - 1]));
      rmax = std::max(rmax, z_norm2(std::span<const double>(arg).subspan(i * d, d)));
    }
    const KernelTable table(params, h2, tmax * (1.0 + 1e-9) + 1e-12, rmax, grid.kernel_tol);
    std::vector<double> vals(N);
    table.evaluate_parallel(arg, vals);
    const Estimate mc = mean_se(vals);
    const double exact = kernel(params, h1 + h2, g).value;
    const double z1 = std::fabs(mc.value - exact) / std::max(mc.se, 1e-300);

    // Bump at gf . V_i . W'_i with V from `sample`, W' from `other`.
    const GroupPoint gf = multiply(params, GroupPoint(f.center()), dilate(0.5, g));
    std::vector<double> fv(N);
    std::vector<double> a(d), b(d);
    for (std::size_t i = 0; i < N; ++i) {
      translate_dilated(params, gf.coords(), sample.point(i), r1, a);
      translate_dilated(params, a, other.point(i), r2, b);
      fv[i] = bump.value(b);
    }
    const Estimate two = mean_se(fv);
    const double one = semigroup_quadrature(params, bump, h1 + h2, gf, grid);
    const double z2 = std::fabs(two.value - one) / std::max(two.se, 1e-300);
    worst = std::max({worst, z1, z2});
    rep.left.insert(rep.left.end(), {mc.value, two.value});
    rep.right.insert(rep.right.end(), {exact, one});
    rep.standard_errors.insert(rep.standard_errors.end(), {mc.se, two.se});
  }
  rep.constant = rep.max_ratio = worst;
  rep.pass = worst <= rep.tolerance;
  return rep;
}

VerificationReport check_histogram(const GroupParams& params, const HeatSample& sample, double h) {
  if (!(h > 0.0)) throw DomainError("diffusion time must be positive");
  VerificationReport rep;
  rep.id = "diffusion-histogram";
  rep.description = "endpoint histogram over (|z_1|, ..., |z_l|, t) against kernel bin masses";
  rep.tolerance = 0.1;
  const int l = params.blocks();
  const auto L = static_cast<std::size_t>(l);
  double sa2 = 0.0;
  for (int m = 0; m < params.n(); ++m) sa2 += params.coef(m) * params.coef(m);
  const double st = 4.0 * h * std::sqrt(sa2);
  std::vector<std::vector<double>> redges(L);
  for (std::size_t j = 0; j < L; ++j) {
    const double s = 0.7 * std::sqrt(4.0 * params.k()[j] * h);
    redges[j] = {0.0, s, 2.0 * s, 4.0 * s};
  }
  const std::vector<double> tedges{-3.0 * st, -st, 0.0, st, 3.0 * st};
  const std::size_t nr = 3, nt = 4;
  std::size_t nbins = nt;
  for (std::size_t j = 0; j < L; ++j) nbins *= nr;

  // Monte-Carlo counts.
  const double r = std::sqrt(h);
  std::vector<double> counts(nbins, 0.0);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto W = sample.point(i);
    std::size_t bin = 0;
    bool inside = true;
    for (std::size_t j = 0; j < L && inside; ++j) {
      const double rj = r * std::sqrt(block_norm2(params, W, static_cast<int>(j)));
      const auto it = std::upper_bound(redges[j].begin(), redges[j].end(), rj);
      if (it == redges[j].begin() || it == redges[j].end()) inside = false;
      bin = bin * nr + static_cast<std::size_t>(it - redges[j].begin() - 1);
    }
    const double t = h * W.back();
    const auto it = std::upper_bound(tedges.begin(), tedges.end(), t);
    if (it == tedges.begin() || it == tedges.end()) inside = false;
    if (!inside) continue;
    bin = bin * nt + static_cast<std::size_t>(it - tedges.begin() - 1);
    counts[bin] += 1.0;
  }

  // Kernel masses by tensor Gauss-Legendre in (r_1..r_l, t).
  const KernelTable table(params, h, 3.0 * st * (1.0 + 1e-9), 0.0, 1e-12);
  const Rule gl = gauss_legendre(6);
  const std::size_t q = gl.x.size();
  double total = 0.0, worst = 0.0;
  std::vector<double> pt(static_cast<std::size_t>(params.dim()), 0.0);
  for (std::size_t bin = 0; bin < nbins; ++bin) {
    std::vector<std::size_t> bi(L + 1);
    std::size_t rest = bin;
    bi[L] = rest % nt;
    rest /= nt;
    for (std::size_t j = L; j-- > 0;) {
      bi[j] = rest % nr;
      rest /= nr;
    }
    double mass = 0.0;
    std::size_t combos = 1;
    for (std::size_t j = 0; j <= L; ++j) combos *= q;
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t cc = c;
      double w = 1.0;
      std::fill(pt.begin(), pt.end(), 0.0);
      for (std::size_t j = 0; j <= L; ++j) {
        const std::size_t node = cc % q;
        cc /= q;
        const auto& e = j < L ? redges[j] : tedges;
        const double lo = e[bi[j]], hi = e[bi[j] + 1];
        const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[node];
        w *= 0.5 * (hi - lo) * gl.w[node];
        if (j < L) {
          // Only |z_j| matters: put it on the first coordinate of block j.
          const int kj = params.k()[j];
          const double sphere = 2.0 * std::pow(kPi, kj) / std::tgamma(kj);
          w *= sphere * std::pow(x, 2 * kj - 1);
          pt[2 * static_cast<std::size_t>(params.block_begin(static_cast<int>(j)))] = x;
        } else {
          pt.back() = x;
        }
      }
      mass += w * table(pt);
    }
    total += mass;
    const double frac = counts[bin] / static_cast<double>(sample.size());
    if (mass >= 0.02) {
      const double rel = std::fabs(frac - mass) / mass;
      worst = std::max(worst, rel);
      rep.left.push_back(frac);
      rep.right.push_back(mass);
      rep.standard_errors.push_back(std::sqrt(mass * (1.0 - mass) / static_cast<double>(sample.size())));
    }
  }
  rep.extra["binned_mass"] = total;
  rep.extra["bins"] = nbins;
  rep.constant = rep.max_ratio = worst;
  rep.pass = !rep.left.empty() && worst <= rep.tolerance;
  return rep;
}

// --- Cheeger pieces ----------------------------------------------------------------

double ball_t_extent(const GroupParams& params, std::span<const double> z) {
  double rho = 0.0;
  for (double x : z) rho += x * x;
  if (z.size() != 2 * static_cast<std::size_t>(params.n())) throw ParameterError("z has the wrong length");
  if (!(rho < 1.0)) throw DomainError("ball_t_extent needs |z| < 1");
  GroupPoint g = GroupPoint::zeros(params.dim());
  for (std::size_t c = 0; c < z.size(); ++c) g[c] = z[c];
  auto f = [&](double t) {
    g[g.size() - 1] = t;
    if (t == 0.0) return std::pair{rho - 1.0, 1.0};
    const ThetaSolution th = solve_theta(params, g);
    return std::pair{distance_squared(params, g) - 1.0, std::max(std::fabs(th.theta), 1e-300)};
  };
  double hi = 1.0 / kPi;
  while (f(hi).first < 0.0) hi *= 2.0;
  return solve_monotone(f, 0.0, hi, 1e-13, 1e-15).x;
}

double ball_t_max(const GroupParams& params) {
  const int l = params.blocks();
  const int steps = l == 1 ? 64 : (l == 2 ? 48 : 12);
  std::vector<double> z(2 * static_cast<std::size_t>(params.n()), 0.0);
  std::vector<int> idx(static_cast<std::size_t>(l), 0);
  double best = 0.0;
  for (;;) {
    int used = 0;
    for (int v : idx) used += v;
    if (used < steps) {
      std::fill(z.begin(), z.end(), 0.0);
      for (int j = 0; j < l; ++j)
        z[2 * static_cast<std::size_t>(params.block_begin(j))] = std::sqrt(static_cast<double>(idx[static_cast<std::size_t>(j)]) / steps);
      best = std::max(best, ball_t_extent(params, z));
    }
    int j = l - 1;
    while (j >= 0 && ++idx[static_cast<std::size_t>(j)] >= steps) idx[static_cast<std::size_t>(j--)] = 0;
    if (j < 0) break;
  }
  return best;
}

std::vector<double> sample_unit_ball(const GroupParams& params, const BallSampleSpec& spec) {
  const auto d = static_cast<std::size_t>(params.dim());
  const auto nz = d - 1;
  const double tbox = 1.1 * ball_t_max(params);
  std::vector<double> out;
  out.reserve(spec.count * d);
  GroupPoint g = GroupPoint::zeros(params.dim());
  for (std::uint64_t attempt = 0; out.size() < spec.count * d; ++attempt) {
    StreamRng rng(spec.seed, kBallStream, attempt);
    double nn = 0.0;
    for (std::size_t c = 0; c < nz; ++c) {
      g[c] = rng.normal();
      nn += g[c] * g[c];
    }
    const double rad = std::pow(rng.uniform(), 1.0 / static_cast<double>(nz)) / std::sqrt(nn);
    for (std::size_t c = 0; c < nz; ++c) g[c] *= rad;
    g[nz] = tbox * (2.0 * rng.uniform() - 1.0);
    if (distance_squared(params, g) < 1.0) {
      if (std::fabs(g[nz]) > tbox / 1.05) throw ResolutionError("unit ball reaches the edge of its sampling box");
      out.insert(out.end(), g.coords().begin(), g.coords().end());
    }
  }
  return out;
}

Estimate ball_mean_mc(const GroupParams& params, const SmoothFunction& f, std::span<const double> ball_points) {
  const auto d = static_cast<std::size_t>(params.dim());
  std::vector<double> v(ball_points.size() / d);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.value(ball_points.subspan(i * d, d));
  return mean_se(v);
}

namespace {

struct BallGrid {
  std::vector<double> points;
  std::vector<double> weights;
};

BallGrid ball_grid(const GroupParams& params, const GridSpec& grid) {
  const int nz = 2 * params.n();
  const auto d = static_cast<std::size_t>(params.dim());
  const BallRule zr = ball_rule(nz, 1.0, grid.radial, grid.angular);
  const Rule tr = gauss_legendre(16);
  const std::size_t nzp = zr.weights.size();
  std::vector<double> ext(nzp);
  const auto N = static_cast<std::ptrdiff_t>(nzp);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < N; ++i) {
    const auto u = static_cast<std::size_t>(i);
    ext[u] = ball_t_extent(params, std::span<const double>(zr.points).subspan(u * static_cast<std::size_t>(nz),
                                                                              static_cast<std::size_t>(nz)));
  }
  BallGrid bg;
  for (std::size_t i = 0; i < nzp; ++i) {
    for (std::size_t k = 0; k < tr.x.size(); ++k) {
      for (std::size_t c = 0; c + 1 < d; ++c) bg.points.push_back(zr.points[i * (d - 1) + c]);
      bg.points.push_back(ext[i] * tr.x[k]);
      bg.weights.push_back(zr.weights[i] * ext[i] * tr.w[k]);
    }
  }
  return bg;
}

double grid_mean(const GroupParams& params, const SmoothFunction& f, const BallGrid& bg) {
  const auto d = static_cast<std::size_t>(params.dim());
  std::vector<double> v(bg.weights.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = bg.weights[i] * f.value(std::span<const double>(bg.points).subspan(i * d, d));
  return pairwise_sum(v) / pairwise_sum(bg.weights);
}

}  // namespace

double ball_mean_grid(const GroupParams& params, const SmoothFunction& f, const GridSpec& grid) {
  return grid_mean(params, f, ball_grid(params, grid));
}

std::array<VerificationReport, 3> check_cheeger(const HeatSample& sample, std::span<const TestFunction> family,
                                                const BallSampleSpec& ball) {
  const GroupParams& params = sample.params();
  const auto d = static_cast<std::size_t>(params.dim());
  const auto n2 = 2 * static_cast<std::size_t>(params.n());
  const std::vector<double> bpts = sample_unit_ball(params, ball);
  const BallGrid bg = ball_grid(params, GridSpec{});
  const std::vector<double>& dist = sample.distances();
  std::array<VerificationReport, 3> reps;
  reps[0].id = "cheeger";
  reps[0].description = "int |f - m_f| p dm / int |grad f| p dm";
  reps[1].id = "lemma3-poincare";
  reps[1].description = "int_B |f - m_f| dm / int_B |grad f| dm";
  reps[2].id = "lemma4-complement";
  reps[2].description = "int_{B^c} |f - m_f| p dm / int |grad f| p dm";
  for (auto& r : reps) r.seed = ball.seed;
  double worst_mean_z = 0.0;
  const std::size_t nb = bpts.size() / d, N = sample.size();
  std::vector<double> grad(d), hor(n2);
  auto grad_norm = [&](const TestFunction& f, std::span<const double> q) {
    f.gradient(q, grad);
    horizontal_from_euclidean(params, Side::left, q, grad, hor);
    double s = 0.0;
    for (double x : hor) s += x * x;
    return std::sqrt(s);
  };
  for (const auto& f : family) {
    const Estimate mf = ball_mean_mc(params, f, bpts);
    const double mg = grid_mean(params, f, bg);
    if (mf.se > 0.0) worst_mean_z = std::max(worst_mean_z, std::fabs(mf.value - mg) / mf.se);
    const double m = mf.value;
    std::vector<double> dev(N), devc(N), gn(N), bdev(nb), bgn(nb);
    for (std::size_t i = 0; i < N; ++i) {
      const auto W = sample.point(i);
      dev[i] = std::fabs(f.value(W) - m);
      devc[i] = dist[i] >= 1.0 ? dev[i] : 0.0;
      gn[i] = grad_norm(f, W);
    }
    for (std::size_t i = 0; i < nb; ++i) {
      const auto q = std::span<const double>(bpts).subspan(i * d, d);
      bdev[i] = std::fabs(f.value(q) - m);
      bgn[i] = grad_norm(f, q);
    }
    const Estimate num = mean_se(dev), numc = mean_se(devc), den = mean_se(gn);
    const Estimate bnum = mean_se(bdev), bden = mean_se(bgn);
    if (below_floor(den)) {
      ++reps[0].excluded;
      ++reps[2].excluded;
    } else {
      reps[0].left.push_back(num.value);
      reps[0].right.push_back(den.value);
      reps[2].left.push_back(numc.value);
      reps[2].right.push_back(den.value);
    }
    if (below_floor(bden)) {
      ++reps[1].excluded;
    } else {
      reps[1].left.push_back(bnum.value);
      reps[1].right.push_back(bden.value);
    }
  }
  for (auto& r : reps) {
    if (r.left.empty()) throw InsufficientDataError("every family member of " + r.id + " was excluded");
    r.summarize_ratios();
    r.extra["ball_mean_mc_vs_grid_max_z"] = worst_mean_z;
    r.judge_band();
  }
  return reps;
}

}  // namespace nhg
