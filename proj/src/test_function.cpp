#include "nhg/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "nhg/errors.hpp"

namespace nhg {

double SmoothFunction::hessian(std::span<const double>, std::span<double>, std::span<double>) const {
  throw CapabilityError("function has no Hessian evaluator");
}

TestFunction::TestFunction(std::vector<double> center, double scale, std::vector<Monomial> poly, bool bump,
                           std::string id)
    : center_(std::move(center)), scale_(scale), poly_(std::move(poly)), bump_(bump), id_(std::move(id)) {
  if (!(scale_ > 0.0)) throw ParameterError("test function scale must be positive");
  for (const auto& mono : poly_) {
    if (mono.exps.size() != center_.size()) throw ParameterError("monomial exponent vector has wrong length");
    for (int e : mono.exps) {
      if (e < 0) throw ParameterError("negative exponent");
      max_exp_ = std::max(max_exp_, e);
    }
  }
  if (center_.size() > 63 || max_exp_ > 7) throw ParameterError("test function exceeds supported size (dim <= 63, exponent <= 7)");
}

TestFunction TestFunction::polynomial(int dim, std::vector<Monomial> poly, std::string id) {
  return TestFunction(std::vector<double>(static_cast<std::size_t>(dim), 0.0), 1.0, std::move(poly), false,
                      std::move(id));
}

TestFunction TestFunction::constant(int dim, double c) {
  return polynomial(dim, {Monomial{c, std::vector<int>(static_cast<std::size_t>(dim), 0)}}, "constant");
}

int TestFunction::degree() const {
  int d = 0;
  for (const auto& mono : poly_) {
    int s = 0;
    for (int e : mono.exps) s += e;
    d = std::max(d, s);
  }
  return d;
}

std::optional<Ball> TestFunction::support() const {
  if (!bump_) return std::nullopt;
  return Ball{center_, scale_};
}

double TestFunction::value(std::span<const double> g) const { return eval(g, {}, {}); }

double TestFunction::gradient(std::span<const double> g, std::span<double> grad) const { return eval(g, grad, {}); }

double TestFunction::hessian(std::span<const double> g, std::span<double> grad, std::span<double> hess) const {
  return eval(g, grad, hess);
}

double TestFunction::eval(std::span<const double> g, std::span<double> grad, std::span<double> hess) const {
  const std::size_t d = center_.size();
  const bool want_grad = !grad.empty();
  const bool want_hess = !hess.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  if (want_hess) std::fill(hess.begin(), hess.end(), 0.0);

  // w and |w|^2
  double w[64];
  double rho = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    w[i] = (g[i] - center_[i]) / scale_;
    rho += w[i] * w[i];
  }
  if (bump_ && rho >= 1.0) return 0.0;

  // powers[i][e] = w_i^e
  const int pe = max_exp_ + 1;
  double powers[64 * 8];
  for (std::size_t i = 0; i < d; ++i) {
    double* row = powers + i * static_cast<std::size_t>(pe);
    row[0] = 1.0;
    for (int e = 1; e < pe; ++e) row[e] = row[e - 1] * w[i];
  }
  auto pw = [&](std::size_t i, int e) { return e < 0 ? 0.0 : powers[i * static_cast<std::size_t>(pe) + static_cast<std::size_t>(e)]; };

  // P, dP/dw, d2P/dw2 in w-coordinates
  double P = 0.0;
  double dP[64] = {};
  double d2P[64 * 64];
  if (want_hess) std::fill(d2P, d2P + d * d, 0.0);
  for (const auto& mono : poly_) {
    double term = mono.coeff;
    for (std::size_t i = 0; i < d; ++i) term *= pw(i, mono.exps[i]);
    P += term;
    if (!want_grad && !want_hess) continue;
    for (std::size_t i = 0; i < d; ++i) {
      const int ei = mono.exps[i];
      if (ei == 0) continue;
      double di = mono.coeff * ei * pw(i, ei - 1);
      for (std::size_t j = 0; j < d; ++j)
        if (j != i) di *= pw(j, mono.exps[j]);
      dP[i] += di;
      if (!want_hess) continue;
      for (std::size_t k = 0; k < d; ++k) {
        const int ek = mono.exps[k];
        double c;
        if (k == i) {
          if (ei < 2) continue;
          c = mono.coeff * ei * (ei - 1) * pw(i, ei - 2);
          for (std::size_t j = 0; j < d; ++j)
            if (j != i) c *= pw(j, mono.exps[j]);
        } else {
          if (ek == 0) continue;
          c = mono.coeff * ei * ek * pw(i, ei - 1) * pw(k, ek - 1);
          for (std::size_t j = 0; j < d; ++j)
            if (j != i && j != k) c *= pw(j, mono.exps[j]);
        }
        d2P[i * d + k] += c;
      }
    }
  }

  double phi = 1.0;
  double one_m = 1.0 - rho;
  if (bump_) phi = one_m * one_m * one_m;
  const double value = P * phi;
  if (!want_grad && !want_hess) return value;

  // d phi / dw_i = -6 (1-rho)^2 w_i
  const double inv_s = 1.0 / scale_;
  for (std::size_t i = 0; i < d; ++i) {
    const double dphi = bump_ ? -6.0 * one_m * one_m * w[i] : 0.0;
    grad[i] = (dP[i] * phi + P * dphi) * inv_s;
  }
  if (want_hess) {
    const double inv_s2 = inv_s * inv_s;
    for (std::size_t i = 0; i < d; ++i) {
      const double dphi_i = bump_ ? -6.0 * one_m * one_m * w[i] : 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double dphi_k = bump_ ? -6.0 * one_m * one_m * w[k] : 0.0;
        double d2phi = 0.0;
        if (bump_) d2phi = (i == k ? -6.0 * one_m * one_m : 0.0) + 24.0 * one_m * w[i] * w[k];
        hess[i * d + k] = (d2P[i * d + k] * phi + dP[i] * dphi_k + dP[k] * dphi_i + P * d2phi) * inv_s2;
      }
    }
  }
  return value;
}

double TestFunction::exact_integral() const {
  if (!bump_) throw DomainError("exact integral needs a compactly supported test function");
  const double d = static_cast<double>(center_.size());
  double total = 0.0;
  for (const auto& mono : poly_) {
    bool odd = false;
    int deg = 0;
    double gam = 0.0;
    for (int e : mono.exps) {
      if (e % 2 != 0) odd = true;
      deg += e;
      gam += std::lgamma(0.5 * (e + 1));
    }
    if (odd) continue;
    // int_{|w|<1} w^alpha (1-|w|^2)^3 dw = 6 prod Gamma((alpha_i+1)/2) / Gamma((|alpha|+d)/2 + 4)
    total += mono.coeff * 6.0 * std::exp(gam - std::lgamma(0.5 * (deg + d) + 4.0));
  }
  return total * std::pow(scale_, d);
}

nlohmann::json TestFunction::to_json() const {
  nlohmann::json poly = nlohmann::json::array();
  for (const auto& mono : poly_) poly.push_back({{"coeff", mono.coeff}, {"exps", mono.exps}});
  return {{"id", id_}, {"center", center_}, {"scale", scale_}, {"bump", bump_}, {"poly", poly}};
}

TestFunction TestFunction::from_json(const nlohmann::json& j) {
  std::vector<Monomial> poly;
  for (const auto& m : j.at("poly")) poly.push_back({m.at("coeff").get<double>(), m.at("exps").get<std::vector<int>>()});
  return TestFunction(j.at("center").get<std::vector<double>>(), j.at("scale").get<double>(), std::move(poly),
                      j.value("bump", true), j.value("id", std::string{}));
}

std::vector<TestFunction> load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open function family file " + path);
  nlohmann::json j;
  in >> j;
  std::vector<TestFunction> out;
  for (const auto& f : j.at("functions")) out.push_back(TestFunction::from_json(f));
  return out;
}

void save_family(const std::string& path, const std::vector<TestFunction>& family) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : family) arr.push_back(f.to_json());
  std::ofstream out(path);
  out << nlohmann::json{{"functions", arr}}.dump(1) << "\n";
}

std::vector<TestFunction> generate_family(const GroupParams& params, int count, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int dim = params.dim();
  std::vector<TestFunction> family;
  for (int idx = 0; idx < count; ++idx) {
    std::vector<double> c(static_cast<std::size_t>(dim), 0.0);
    const bool inside = idx < count / 2;
    // Inside: |z| <= 0.5, |t| <= 0.15 lies in the unit CC ball.
    // Outside: |z| >= 1.2 or |t| >= 1 lies outside it.
    double zr = inside ? 0.5 * unif(rng) : 1.2 + 1.3 * unif(rng);
    double tr = inside ? 0.15 * (2.0 * unif(rng) - 1.0) : (1.0 + unif(rng)) * (unif(rng) < 0.5 ? -1.0 : 1.0);
    if (!inside && idx % 2 == 0) zr *= 0.3;  // t-dominated outside centers
    if (!inside && idx % 2 == 1) tr *= 0.1;  // z-dominated outside centers
    double norm = 0.0;
    for (int i = 0; i + 1 < dim; ++i) {
      c[static_cast<std::size_t>(i)] = normal(rng);
      norm += c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
    }
    norm = std::sqrt(norm);
    for (int i = 0; i + 1 < dim; ++i) c[static_cast<std::size_t>(i)] *= zr / norm;
    c.back() = tr;
    const double scale = 0.25 * std::pow(16.0, unif(rng));
    const int deg = idx % 5;

    std::vector<Monomial> poly;
    poly.push_back({1.0, std::vector<int>(static_cast<std::size_t>(dim), 0)});
    const int extra = deg == 0 ? 0 : 3;
    for (int e = 0; e < extra; ++e) {
      const int total = e == 0 ? deg : 1 + static_cast<int>(unif(rng) * deg);
      std::vector<int> exps(static_cast<std::size_t>(dim), 0);
      for (int q = 0; q < total; ++q) exps[static_cast<std::size_t>(unif(rng) * dim) % static_cast<std::size_t>(dim)]++;
      poly.push_back({normal(rng), exps});
    }
    family.emplace_back(c, scale, poly, true, "f" + std::to_string(idx));
  }
  return family;
}

// --- fields -----------------------------------------------------------------

void horizontal_from_euclidean(const GroupParams& params, Side side, std::span<const double> g,
                               std::span<const double> grad, std::span<double> out) {
  const double ft = grad[grad.size() - 1];
  const double sign = side == Side::left ? 1.0 : -1.0;
  for (int m = 0; m < params.n(); ++m) {
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    const double c = 2.0 * params.coef(m) * sign;
    out[i] = grad[i] + c * g[i + 1] * ft;
    out[i + 1] = grad[i + 1] - c * g[i] * ft;
  }
}

namespace {
double apply_field(const GroupParams& params, Side side, FieldIndex which, const SmoothFunction& f,
                   const GroupPoint& g) {
  check_shape(params, g.coords());
  if (which.coord < 0 || which.coord >= params.n() || (which.dir != 0 && which.dir != 1))
    throw ParameterError("invalid field index");
  std::vector<double> grad(g.size());
  f.gradient(g.coords(), grad);
  std::vector<double> h(2 * static_cast<std::size_t>(params.n()));
  horizontal_from_euclidean(params, side, g.coords(), grad, h);
  return h[2 * static_cast<std::size_t>(which.coord) + static_cast<std::size_t>(which.dir)];
}
}  // namespace

double apply_left_field(const GroupParams& params, FieldIndex which, const SmoothFunction& f, const GroupPoint& g) {
  return apply_field(params, Side::left, which, f, g);
}

double apply_right_field(const GroupParams& params, FieldIndex which, const SmoothFunction& f, const GroupPoint& g) {
  return apply_field(params, Side::right, which, f, g);
}

double horizontal_gradient_norm(const GroupParams& params, const SmoothFunction& f, const GroupPoint& g, Side side) {
  check_shape(params, g.coords());
  std::vector<double> grad(g.size());
  f.gradient(g.coords(), grad);
  std::vector<double> h(2 * static_cast<std::size_t>(params.n()));
  horizontal_from_euclidean(params, side, g.coords(), grad, h);
  double s = 0.0;
  for (double v : h) s += v * v;
  return std::sqrt(s);
}

double sub_laplacian(const GroupParams& params, const SmoothFunction& f, const GroupPoint& g) {
  check_shape(params, g.coords());
  if (!f.has_hessian()) throw CapabilityError("sub-Laplacian needs a Hessian evaluator");
  const std::size_t d = g.size();
  std::vector<double> grad(d), hess(d * d);
  f.hessian(g.coords(), grad, hess);
  const std::size_t tt = d - 1;
  double s = 0.0;
  // X^2 f = f_xx + 4 a y f_xt + 4 a^2 y^2 f_tt,  Y^2 f = f_yy - 4 a x f_yt + 4 a^2 x^2 f_tt
  for (int m = 0; m < params.n(); ++m) {
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    const double a = params.coef(m);
    const double x = g[i], y = g[i + 1];
    s += hess[i * d + i] + 4.0 * a * y * hess[i * d + tt] + 4.0 * a * a * y * y * hess[tt * d + tt];
    s += hess[(i + 1) * d + i + 1] - 4.0 * a * x * hess[(i + 1) * d + tt] + 4.0 * a * a * x * x * hess[tt * d + tt];
  }
  return s;
}

// --- affine pullback ----------------------------------------------------------

AffinePullback::AffinePullback(const SmoothFunction& f, std::vector<double> matrix, std::vector<double> offset)
    : f_(f), m_(std::move(matrix)), b_(std::move(offset)) {
  if (m_.size() != b_.size() * b_.size()) throw ParameterError("affine map shape mismatch");
}

void AffinePullback::map(std::span<const double> g, std::span<double> out) const {
  const std::size_t d = b_.size();
  for (std::size_t i = 0; i < d; ++i) {
    double s = b_[i];
    for (std::size_t j = 0; j < d; ++j) s += m_[i * d + j] * g[j];
    out[i] = s;
  }
}

double AffinePullback::value(std::span<const double> g) const {
  double y[64];
  map(g, std::span<double>(y, b_.size()));
  return f_.value(std::span<const double>(y, b_.size()));
}

double AffinePullback::gradient(std::span<const double> g, std::span<double> grad) const {
  const std::size_t d = b_.size();
  double y[64], gy[64];
  map(g, std::span<double>(y, d));
  const double v = f_.gradient(std::span<const double>(y, d), std::span<double>(gy, d));
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += m_[i * d + j] * gy[i];
    grad[j] = s;
  }
  return v;
}

AffinePullback translate_dilate(const GroupParams& params, const SmoothFunction& f, const GroupPoint& g, double r) {
  if (!(r > 0.0)) throw DomainError("dilation factor must be positive");
  // g . delta_r(g') = (z + r z', t + r^2 t' + 2 r w(z, z'))
  const std::size_t d = g.size();
  std::vector<double> m(d * d, 0.0);
  for (std::size_t i = 0; i + 1 < d; ++i) m[i * d + i] = r;
  m[(d - 1) * d + (d - 1)] = r * r;
  for (int k = 0; k < params.n(); ++k) {
    const std::size_t i = 2 * static_cast<std::size_t>(k);
    const double a = params.coef(k);
    m[(d - 1) * d + i] = 2.0 * r * a * g[i + 1];
    m[(d - 1) * d + i + 1] = -2.0 * r * a * g[i];
  }
  std::vector<double> b(g.coords().begin(), g.coords().end());
  return AffinePullback(f, std::move(m), std::move(b));
}

}  // namespace nhg
