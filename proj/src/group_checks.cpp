#include "nhg/group_checks.hpp"

#include <algorithm>
#include <cmath>

#include "nhg/quadrature.hpp"
#include "nhg/rng.hpp"

namespace nhg {

namespace {

constexpr std::uint64_t kAxiomStream = 0x6a01;
constexpr std::uint64_t kFieldStream = 0x6a02;
constexpr std::uint64_t kMeasureStream = 0x6a03;

GroupPoint random_point(StreamRng& rng, int dim, double scale) {
  GroupPoint g = GroupPoint::zeros(dim);
  for (auto& c : g.coords()) c = scale * rng.normal();
  return g;
}

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double sup_diff(const GroupPoint& a, const GroupPoint& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// Cubic polynomial with random coefficients, so every field sees nonzero derivatives.
TestFunction random_polynomial(const GroupParams& params, StreamRng& rng) {
  const int dim = params.dim();
  std::vector<Monomial> poly;
  for (int term = 0; term < 6; ++term) {
    std::vector<int> e(static_cast<std::size_t>(dim), 0);
    const int deg = 1 + static_cast<int>(rng.uniform() * 3.0);
    for (int q = 0; q < deg; ++q) e[static_cast<std::size_t>(rng.uniform() * dim) % static_cast<std::size_t>(dim)]++;
    poly.push_back({rng.normal(), e});
  }
  return TestFunction::polynomial(dim, poly);
}

FieldIndex random_field(const GroupParams& params, StreamRng& rng) {
  const int m = static_cast<int>(rng.uniform() * params.n()) % params.n();
  return {m, rng.uniform() < 0.5 ? 0 : 1};
}

}  // namespace

AffinePullback right_translate(const GroupParams& params, const SmoothFunction& f, const GroupPoint& h) {
  // g . h = (z + z_h, t + t_h + 2 sum a (y x_h - x y_h))
  const std::size_t d = h.size();
  std::vector<double> m(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) m[i * d + i] = 1.0;
  for (int k = 0; k < params.n(); ++k) {
    const std::size_t i = 2 * static_cast<std::size_t>(k);
    const double a = params.coef(k);
    m[(d - 1) * d + i] = -2.0 * a * h[i + 1];
    m[(d - 1) * d + i + 1] = 2.0 * a * h[i];
  }
  std::vector<double> b(h.coords().begin(), h.coords().end());
  return AffinePullback(f, std::move(m), std::move(b));
}

VerificationReport check_group_axioms(const GroupParams& params, std::size_t cases, std::uint64_t seed) {
  VerificationReport rep;
  rep.id = "group-axioms";
  rep.description = "associativity, identity, inverse, dilation automorphism, relative sup deviation";
  rep.seed = seed;
  rep.tolerance = 1e-13;
  const int dim = params.dim();
  const GroupPoint e = origin(params);
  double w_assoc = 0.0, w_id = 0.0, w_inv = 0.0, w_dil = 0.0, w_comp = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    StreamRng rng(seed, kAxiomStream, c);
    const double scale = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
    const GroupPoint g = random_point(rng, dim, scale);
    const GroupPoint h = random_point(rng, dim, scale);
    const GroupPoint k = random_point(rng, dim, scale);
    const double r = std::exp(2.0 * rng.normal());
    const double s = std::exp(rng.normal());
    const double size = 1.0 + std::max({sup_norm(g.coords()), sup_norm(h.coords()), sup_norm(k.coords())});

    const double assoc =
        sup_diff(multiply(params, multiply(params, g, h), k), multiply(params, g, multiply(params, h, k))) /
        (size * size);
    const double id = std::max(sup_diff(multiply(params, g, e), g), sup_diff(multiply(params, e, g), g)) / size;
    const double inv = std::max(sup_norm(multiply(params, g, inverse(g)).coords()),
                                sup_norm(multiply(params, inverse(g), g).coords())) /
                       (size * size);
    const GroupPoint lhs = dilate(r, multiply(params, g, h));
    const GroupPoint rhs = multiply(params, dilate(r, g), dilate(r, h));
    const double rs = std::max(r, 1.0);
    const double dil = sup_diff(lhs, rhs) / (rs * rs * size * size);
    const double comp = sup_diff(dilate(r, dilate(s, g)), dilate(r * s, g)) /
                        (std::max(r * s, 1.0) * std::max(r * s, 1.0) * size);
    w_assoc = std::max(w_assoc, assoc);
    w_id = std::max(w_id, id);
    w_inv = std::max(w_inv, inv);
    w_dil = std::max(w_dil, dil);
    w_comp = std::max(w_comp, comp);
    rep.left.push_back(std::max({assoc, id, inv, dil, comp}));
    rep.right.push_back(rep.tolerance);
  }
  rep.constant = rep.max_ratio = std::max({w_assoc, w_id, w_inv, w_dil, w_comp});
  rep.min_ratio = 0.0;
  rep.extra = {{"associativity", w_assoc},
               {"identity", w_id},
               {"inverse", w_inv},
               {"dilation_automorphism", w_dil},
               {"dilation_composition", w_comp},
               {"cases", cases}};
  rep.pass = cases > 0 && rep.constant <= rep.tolerance;
  return rep;
}

VerificationReport check_field_invariance(const GroupParams& params, std::size_t cases, std::uint64_t seed) {
  VerificationReport rep;
  rep.id = "field-invariance";
  rep.description = "X(f o L_h)(g) - (Xf)(hg) and X-hat(f o R_h)(g) - (X-hat f)(gh), relative";
  rep.seed = seed;
  rep.tolerance = 1e-10;
  const int dim = params.dim();
  double w_left = 0.0, w_right = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    StreamRng rng(seed, kFieldStream, c);
    const TestFunction f = random_polynomial(params, rng);
    const GroupPoint g = random_point(rng, dim, 0.7);
    const GroupPoint h = random_point(rng, dim, 0.7);
    const FieldIndex which = random_field(params, rng);

    const AffinePullback fl = translate_dilate(params, f, h, 1.0);
    const double a = apply_left_field(params, which, fl, g);
    const double b = apply_left_field(params, which, f, multiply(params, h, g));
    const AffinePullback fr = right_translate(params, f, h);
    const double ar = apply_right_field(params, which, fr, g);
    const double br = apply_right_field(params, which, f, multiply(params, g, h));
    const double dl = std::fabs(a - b) / (1.0 + std::fabs(b));
    const double dr = std::fabs(ar - br) / (1.0 + std::fabs(br));
    w_left = std::max(w_left, dl);
    w_right = std::max(w_right, dr);
    rep.left.push_back(std::max(dl, dr));
    rep.right.push_back(rep.tolerance);
  }
  rep.constant = rep.max_ratio = std::max(w_left, w_right);
  rep.extra = {{"left", w_left}, {"right", w_right}, {"cases", cases}};
  rep.pass = cases > 0 && rep.constant <= rep.tolerance;
  return rep;
}

VerificationReport check_field_finite_difference(const GroupParams& params, std::size_t cases, std::uint64_t seed,
                                                 double eps) {
  VerificationReport rep;
  rep.id = "field-finite-difference";
  rep.description = "chain-rule field against central differences along g exp(eE) and exp(eE) g";
  rep.seed = seed;
  rep.tolerance = 1e-5;
  const int dim = params.dim();
  double w_left = 0.0, w_right = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    StreamRng rng(seed, kFieldStream ^ 0xfd, c);
    const TestFunction f = random_polynomial(params, rng);
    const GroupPoint g = random_point(rng, dim, 0.7);
    const FieldIndex which = random_field(params, rng);
    GroupPoint step = GroupPoint::zeros(dim);
    step[2 * static_cast<std::size_t>(which.coord) + static_cast<std::size_t>(which.dir)] = eps;
    const GroupPoint back = inverse(step);

    const double fd_left =
        (f.value(multiply(params, g, step).coords()) - f.value(multiply(params, g, back).coords())) / (2.0 * eps);
    const double fd_right =
        (f.value(multiply(params, step, g).coords()) - f.value(multiply(params, back, g).coords())) / (2.0 * eps);
    const double xl = apply_left_field(params, which, f, g);
    const double xr = apply_right_field(params, which, f, g);
    const double dl = std::fabs(xl - fd_left) / (1.0 + std::fabs(xl));
    const double dr = std::fabs(xr - fd_right) / (1.0 + std::fabs(xr));
    w_left = std::max(w_left, dl);
    w_right = std::max(w_right, dr);
    rep.left.push_back(std::max(dl, dr));
    rep.right.push_back(rep.tolerance);
  }
  rep.constant = rep.max_ratio = std::max(w_left, w_right);
  rep.extra = {{"left", w_left}, {"right", w_right}, {"eps", eps}, {"cases", cases}};
  rep.pass = cases > 0 && rep.constant <= rep.tolerance;
  return rep;
}

VerificationReport check_measure_invariance(const GroupParams& params, std::size_t cases, std::size_t samples,
                                            std::uint64_t seed) {
  VerificationReport rep;
  rep.id = "measure-invariance";
  rep.description = "|MC int f(h w), f(w h), r^Q f(delta_r w) dw - int f| / SE";
  rep.seed = seed;
  rep.tolerance = 3.0;
  const int dim = params.dim();
  const std::size_t d = static_cast<std::size_t>(dim);
  const double Q = 2.0 * params.n() + 2.0;
  double worst = 0.0;
  nlohmann::json zs = nlohmann::json::array();
  for (std::size_t c = 0; c < cases; ++c) {
    StreamRng rng(seed, kMeasureStream, c);
    std::vector<double> center(d);
    for (auto& x : center) x = 0.5 * rng.normal();
    const double scale = 0.5 + 0.5 * rng.uniform();
    std::vector<Monomial> poly{{1.0, std::vector<int>(d, 0)}};
    std::vector<int> e(d, 0);
    e[static_cast<std::size_t>(rng.uniform() * dim) % d] = 2;
    poly.push_back({rng.normal(), e});
    const TestFunction f(center, scale, poly, true);
    const double exact = f.exact_integral();
    const GroupPoint h = random_point(rng, dim, 0.8);
    const double r = std::exp(0.5 * rng.normal());

    for (int variant = 0; variant < 3; ++variant) {
      // Box containing the preimage of the support ball under the variant's map.
      std::vector<double> lo(d), hi(d);
      double jac = 1.0;
      if (variant < 2) {
        double bound = 0.0;
        for (int m = 0; m < params.n(); ++m) {
          const std::size_t i = 2 * static_cast<std::size_t>(m);
          const double wx = std::fabs(center[i] - h[i]) + scale;
          const double wy = std::fabs(center[i + 1] - h[i + 1]) + scale;
          bound += 2.0 * params.coef(m) * (std::fabs(h[i + 1]) * wx + std::fabs(h[i]) * wy);
        }
        for (std::size_t i = 0; i + 1 < d; ++i) {
          lo[i] = center[i] - h[i] - scale;
          hi[i] = center[i] - h[i] + scale;
        }
        lo[d - 1] = center[d - 1] - h.t() - scale - bound;
        hi[d - 1] = center[d - 1] - h.t() + scale + bound;
      } else {
        for (std::size_t i = 0; i + 1 < d; ++i) {
          lo[i] = (center[i] - scale) / r;
          hi[i] = (center[i] + scale) / r;
        }
        lo[d - 1] = (center[d - 1] - scale) / (r * r);
        hi[d - 1] = (center[d - 1] + scale) / (r * r);
        jac = std::pow(r, Q);
      }
      double vol = 1.0;
      for (std::size_t i = 0; i < d; ++i) vol *= hi[i] - lo[i];

      std::vector<double> vals(samples), sq(samples);
      GroupPoint w = GroupPoint::zeros(dim);
      StreamRng pr(seed, kMeasureStream ^ (0x100 * (static_cast<std::uint64_t>(variant) + 1)), c);
      for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < d; ++i) w[i] = lo[i] + (hi[i] - lo[i]) * pr.uniform();
        GroupPoint img = variant == 0   ? multiply(params, h, w)
                         : variant == 1 ? multiply(params, w, h)
                                        : dilate(r, w);
        const double v = jac * vol * f.value(img.coords());
        vals[s] = v;
        sq[s] = v * v;
      }
      const double n = static_cast<double>(samples);
      const double mean = pairwise_sum(vals) / n;
      const double var = std::max(pairwise_sum(sq) / n - mean * mean, 0.0);
      const double se = std::sqrt(var / n);
      const double z = se > 0.0 ? std::fabs(mean - exact) / se : (mean == exact ? 0.0 : HUGE_VAL);
      worst = std::max(worst, z);
      zs.push_back(z);
      rep.left.push_back(mean);
      rep.right.push_back(exact);
      rep.standard_errors.push_back(se);
    }
  }
  rep.constant = rep.max_ratio = worst;
  rep.extra = {{"z_scores", zs}, {"variants", {"left", "right", "dilation"}}, {"samples", samples}};
  rep.pass = cases > 0 && worst <= rep.tolerance;
  return rep;
}

}  // namespace nhg
