#include <doctest.h>

#include <cmath>
#include <complex>

#include "nhg/errors.hpp"
#include "nhg/group.hpp"
#include "nhg/group_checks.hpp"
#include "nhg/rng.hpp"
#include "nhg/test_function.hpp"

using namespace nhg;

namespace {

GroupPoint random_point(const GroupParams& G, std::uint64_t i, double scale = 1.0) {
  StreamRng rng(5, 0x71, i);
  GroupPoint g = GroupPoint::zeros(G.dim());
  for (auto& c : g.coords()) c = scale * rng.normal();
  return g;
}

// t-increment computed with complex numbers, <w, w'> = sum w conj(w').
double t_oracle(const GroupParams& G, const GroupPoint& g, const GroupPoint& h) {
  double s = 0.0;
  for (int m = 0; m < G.n(); ++m) s += 2.0 * G.coef(m) * std::imag(g.z(m) * std::conj(h.z(m)));
  return g.t() + h.t() + s;
}

TestFunction bump(const GroupParams& G, std::uint64_t seed) {
  StreamRng rng(seed, 0x72, 0);
  std::vector<double> c(static_cast<std::size_t>(G.dim()));
  for (auto& x : c) x = 0.3 * rng.normal();
  std::vector<Monomial> poly;
  poly.push_back({1.0, std::vector<int>(static_cast<std::size_t>(G.dim()), 0)});
  for (int d = 0; d < G.dim(); ++d) {
    std::vector<int> e(static_cast<std::size_t>(G.dim()), 0);
    e[static_cast<std::size_t>(d)] = 1 + d % 2;
    poly.push_back({rng.normal(), e});
  }
  return TestFunction(c, 1.5, poly);
}

}  // namespace

TEST_CASE("parameters are validated") {
  CHECK_THROWS_AS(GroupParams({1, 1}, {1.0, 0.5}), ParameterError);
  CHECK_THROWS_AS(GroupParams({1}, {0.5}), ParameterError);
  CHECK_THROWS_AS(GroupParams({0}, {1.0}), ParameterError);
  CHECK_THROWS_AS(GroupParams({1, 2}, {1.0}), ParameterError);
  const GroupParams G({1, 2}, {0.5, 1.0});
  CHECK(G.n() == 3);
  CHECK(G.dim() == 7);
  CHECK(G.coef(0) == 0.5);
  CHECK(G.coef(2) == 1.0);
}

TEST_CASE("multiply matches the complex-arithmetic oracle") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  const GroupPoint g({1.0, 0.0, 0.0, 1.0, 0.0});
  const GroupPoint h({0.0, 1.0, 1.0, 0.0, 0.0});
  const GroupPoint p = multiply(G, g, h);
  CHECK(p.t() == doctest::Approx(t_oracle(G, g, h)).epsilon(1e-15));
  CHECK(p.t() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p[0] == 1.0);
  CHECK(p[3] == 1.0);

  const GroupParams G2({1, 2}, {0.5, 1.0});
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto a = random_point(G2, 2 * i), b = random_point(G2, 2 * i + 1);
    CHECK(multiply(G2, a, b).t() == doctest::Approx(t_oracle(G2, a, b)).epsilon(1e-13));
  }
}

TEST_CASE("identity, inverse and dilation") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  const auto g = random_point(G, 3);
  CHECK(multiply(G, g, origin(G)) == g);
  CHECK(multiply(G, origin(G), g) == g);
  const auto e = multiply(G, g, inverse(g));
  for (double c : e.coords()) CHECK(c == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(inverse(origin(G)) == origin(G));
  CHECK(inverse(inverse(g)) == g);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(inverse(g)[i] == -g[i]);
  CHECK(dilate(1.0, g) == g);
  const auto d = dilate(2.0, g);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(d[i] == 2.0 * g[i]);
  CHECK(d.t() == 4.0 * g.t());
  const auto dd = dilate(0.5, dilate(3.0, g));
  const auto d15 = dilate(1.5, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(dd[i] == doctest::Approx(d15[i]).epsilon(1e-15));
  CHECK_THROWS_AS(dilate(0.0, g), DomainError);
  CHECK_THROWS_AS(dilate(-1.0, g), DomainError);
  CHECK_THROWS_AS(multiply(G, g, GroupPoint::zeros(5)), ParameterError);
}

TEST_CASE("dilation is an automorphism") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto a = random_point(G, 2 * i), b = random_point(G, 2 * i + 1);
    const auto lhs = dilate(1.7, multiply(G, a, b));
    const auto rhs = multiply(G, dilate(1.7, a), dilate(1.7, b));
    for (std::size_t c = 0; c < lhs.size(); ++c) CHECK(lhs[c] == doctest::Approx(rhs[c]).epsilon(1e-13));
  }
}

TEST_CASE("fields on f = t and on constants") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  std::vector<int> et(7, 0);
  et[6] = 1;
  const auto ft = TestFunction::polynomial(7, {{1.0, et}});
  const auto g = random_point(G, 9);
  for (int m = 0; m < G.n(); ++m) {
    CHECK(apply_left_field(G, {m, 0}, ft, g) == doctest::Approx(2.0 * G.coef(m) * g.y(m)));
    CHECK(apply_left_field(G, {m, 1}, ft, g) == doctest::Approx(-2.0 * G.coef(m) * g.x(m)));
    CHECK(apply_right_field(G, {m, 0}, ft, g) == doctest::Approx(-2.0 * G.coef(m) * g.y(m)));
    CHECK(apply_right_field(G, {m, 1}, ft, g) == doctest::Approx(2.0 * G.coef(m) * g.x(m)));
  }
  const auto c = TestFunction::constant(7, 3.0);
  CHECK(horizontal_gradient_norm(G, c, g) == 0.0);
  CHECK(sub_laplacian(G, c, g) == 0.0);
  CHECK_THROWS_AS(apply_left_field(G, {3, 0}, ft, g), ParameterError);
  CHECK_THROWS_AS(apply_left_field(G, {0, 2}, ft, g), ParameterError);
}

TEST_CASE("x coordinate has unit gradient and |z|^2 has sub-Laplacian 4n") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  std::vector<int> ex(7, 0);
  ex[0] = 1;
  const auto fx = TestFunction::polynomial(7, {{1.0, ex}});
  GroupPoint g = GroupPoint::zeros(7);
  g[6] = 0.7;
  CHECK(horizontal_gradient_norm(G, fx, g) == doctest::Approx(1.0));
  std::vector<Monomial> z2;
  for (int d = 0; d < 6; ++d) {
    std::vector<int> e(7, 0);
    e[static_cast<std::size_t>(d)] = 2;
    z2.push_back({1.0, e});
  }
  const auto fz = TestFunction::polynomial(7, z2);
  CHECK(sub_laplacian(G, fz, random_point(G, 4)) == doctest::Approx(4.0 * G.n()).epsilon(1e-12));
}

TEST_CASE("left and right fields agree at the origin") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  const auto f = bump(G, 1);
  for (int m = 0; m < G.n(); ++m)
    for (int dir = 0; dir < 2; ++dir)
      CHECK(apply_left_field(G, {m, dir}, f, origin(G)) ==
            doctest::Approx(apply_right_field(G, {m, dir}, f, origin(G))).epsilon(1e-14));
}

TEST_CASE("fields match finite differences along their flows") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  const auto f = bump(G, 2);
  const double eps = 1e-5;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto g = random_point(G, 100 + i, 0.3);
    for (int m = 0; m < G.n(); ++m) {
      for (int dir = 0; dir < 2; ++dir) {
        GroupPoint step = GroupPoint::zeros(7);
        step[static_cast<std::size_t>(2 * m + dir)] = eps;
        const GroupPoint back = inverse(step);
        const double left_fd = (f.value(multiply(G, g, step).coords()) - f.value(multiply(G, g, back).coords())) / (2 * eps);
        const double right_fd = (f.value(multiply(G, step, g).coords()) - f.value(multiply(G, back, g).coords())) / (2 * eps);
        CHECK(apply_left_field(G, {m, dir}, f, g) == doctest::Approx(left_fd).epsilon(1e-6).scale(1.0));
        CHECK(apply_right_field(G, {m, dir}, f, g) == doctest::Approx(right_fd).epsilon(1e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("sub-Laplacian matches second differences along the flows") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  const auto f = bump(G, 3);
  const double eps = 1e-3;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto g = random_point(G, 200 + i, 0.3);
    const double f0 = f.value(g.coords());
    double fd = 0.0;
    for (int m = 0; m < G.n(); ++m)
      for (int dir = 0; dir < 2; ++dir) {
        GroupPoint step = GroupPoint::zeros(G.dim());
        step[static_cast<std::size_t>(2 * m + dir)] = eps;
        fd += (f.value(multiply(G, g, step).coords()) - 2 * f0 + f.value(multiply(G, g, inverse(step)).coords())) /
              (eps * eps);
      }
    CHECK(sub_laplacian(G, f, g) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("gradient norm is the norm of the components") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  const auto f = bump(G, 4);
  const auto g = random_point(G, 300, 0.3);
  double s = 0.0;
  for (int m = 0; m < G.n(); ++m)
    for (int dir = 0; dir < 2; ++dir) s += std::pow(apply_right_field(G, {m, dir}, f, g), 2);
  CHECK(horizontal_gradient_norm(G, f, g, Side::right) == doctest::Approx(std::sqrt(s)).epsilon(1e-14));
}

TEST_CASE("group suite checks pass on a small run") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  CHECK(check_group_axioms(G, 500, 1).pass);
  CHECK(check_field_invariance(G, 200, 1).pass);
  CHECK(check_field_finite_difference(G, 200, 1).pass);
  CHECK(check_measure_invariance(G, 2, 20000, 1).pass);
}
