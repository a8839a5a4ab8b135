#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "nhg/distance.hpp"
#include "nhg/errors.hpp"
#include "nhg/polar.hpp"
#include "nhg/rng.hpp"

using namespace nhg;
using std::numbers::pi;

TEST_CASE("psi block norms, distance and small eta") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  const auto pts = sample_polar_points(G, 50, 3);
  for (const auto& p : pts) {
    const auto g = psi(G, p);
    for (int m = 0; m < G.n(); ++m) {
      const double a = G.coef(m);
      const double u2 = p.u[2 * m] * p.u[2 * m] + p.u[2 * m + 1] * p.u[2 * m + 1];
      const double z2 = g.x(m) * g.x(m) + g.y(m) * g.y(m);
      CHECK(z2 == doctest::Approx(u2 * (2 - 2 * std::cos(2 * a * p.eta))).epsilon(1e-12));
    }
    CHECK(distance(G, g) == doctest::Approx(polar_U(G, p) * std::abs(p.eta)).epsilon(1e-8));
    CHECK((g.t() > 0) == (p.eta > 0));
  }
  PolarPoint tiny{pts[0].u, 1e-9};
  const auto small = psi(G, tiny);
  for (double c : small.coords()) CHECK(std::abs(c) < 1e-7);
}

TEST_CASE("psi roundtrips") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  for (const auto& p : sample_polar_points(G, 100, 4)) {
    const auto q = psi_inverse(G, psi(G, p));
    CHECK(q.eta == doctest::Approx(p.eta).epsilon(1e-10));
    for (std::size_t i = 0; i < p.u.size(); ++i) CHECK(q.u[i] == doctest::Approx(p.u[i]).epsilon(1e-10).scale(1.0));
  }
  StreamRng rng(5, 6, 0);
  for (int i = 0; i < 100; ++i) {
    GroupPoint g = GroupPoint::zeros(7);
    for (auto& c : g.coords()) c = rng.normal();
    const auto back = psi(G, psi_inverse(G, g));
    for (std::size_t c = 0; c < 7; ++c) CHECK(back[c] == doctest::Approx(g[c]).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS_AS(psi_inverse(G, GroupPoint({1, 0, 0, 0, 0, 0, 1.0})), BranchError);
  CHECK_THROWS_AS(psi_inverse(G, GroupPoint({1, 0, 0, 0, 1, 0, 0.0})), BranchError);
}

TEST_CASE("jacobian matrix against finite differences of psi") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  const double eps = 1e-6;
  for (const auto& p : sample_polar_points(G, 5, 7)) {
    const auto M = jacobian_matrix(G, p);
    for (int c = 0; c < 7; ++c) {
      PolarPoint a = p, b = p;
      if (c < 6) {
        a.u[c] += eps;
        b.u[c] -= eps;
      } else {
        a.eta += eps;
        b.eta -= eps;
      }
      const auto ga = psi(G, a), gb = psi(G, b);
      for (int r = 0; r < 7; ++r) CHECK(M(r, c) == doctest::Approx((ga[r] - gb[r]) / (2 * eps)).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("jacobian homogeneity in u") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  auto p = sample_polar_points(G, 1, 8)[0];
  const auto M = jacobian_matrix(G, p);
  for (auto& x : p.u) x *= 3.0;
  const auto M3 = jacobian_matrix(G, p);
  for (int i = 0; i < 4; ++i) {
    CHECK(M3(i, 4) == doctest::Approx(3 * M(i, 4)));
    CHECK(M3(4, i) == doctest::Approx(3 * M(4, i)));
    CHECK(M3(i, i) == M(i, i));
  }
  CHECK(M3(4, 4) == doctest::Approx(9 * M(4, 4)));
}

TEST_CASE("closed-form jacobian") {
  const GroupParams H({1}, {1.0});
  const PolarPoint p{{0.6, -0.3}, pi / 2};
  CHECK(jacobian_closed_form(H, p) == doctest::Approx(32 * 0.45).epsilon(1e-13));
  const GroupParams G({1, 2}, {0.5, 1.0});
  for (const auto& q : sample_polar_points(G, 100, 9)) {
    const auto M = jacobian_matrix(G, q);
    const double lu = M.partialPivLu().determinant();
    const double J = jacobian_closed_form(G, q);
    CHECK(J > 0);
    CHECK(J == doctest::Approx(lu).epsilon(1e-9));
    CHECK(det_via_lemma5(M) == doctest::Approx(lu).epsilon(1e-9));
    CHECK(std::log(J) == doctest::Approx(log_jacobian(G, q)).epsilon(1e-12));
  }
}

TEST_CASE("bordered determinant recursion") {
  CHECK(det_via_lemma5(Eigen::MatrixXd::Identity(5, 5)) == doctest::Approx(1.0));
  StreamRng rng(12, 1, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 * (1 + trial % 4) + 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int b = 0; b + 1 < m; b += 2)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) M(b + i, b + j) = rng.normal();
    for (int i = 0; i < m; ++i) {
      M(i, m - 1) = rng.normal();
      M(m - 1, i) = rng.normal();
    }
    CHECK(det_via_lemma5(M) == doctest::Approx(M.partialPivLu().determinant()).epsilon(1e-9));
  }
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(5, 5);
  bad(0, 3) = 1.0;
  CHECK_THROWS_AS(det_via_lemma5(bad), ParameterError);
  CHECK_THROWS_AS(det_via_lemma5(Eigen::MatrixXd::Identity(4, 4)), ParameterError);
}

TEST_CASE("regions") {
  const GroupParams H({1}, {1.0});
  CHECK(classify_region(H, PolarPoint{{5.0, 0.0}, pi / 8}) == Region::R1);
  CHECK(classify_region(H, PolarPoint{{100.0, 0.0}, 3.0}) == Region::R2);
  CHECK(classify_region(H, PolarPoint{{1.0, 0.0}, 3.0}) == Region::R3);
  CHECK_THROWS_AS(classify_region(H, PolarPoint{{0.1, 0.0}, 1.0}), DomainError);
  const GroupParams G({1, 1}, {0.5, 1.0});
  CHECK(classify_region(G, PolarPoint{{0.0, 0.0, 1.0, 0.0}, -3.0}) == Region::R3);
  CHECK(classify_region(G, PolarPoint{{100.0, 0.0, 1.0, 0.0}, 3.0}) == Region::R2);
}

TEST_CASE("comparison yardstick far from pi") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  const PolarPoint p{{0.8, 0.1, 1.2, -0.5}, 1.5};
  REQUIRE(!in_unit_ball(G, p));
  const double u = std::sqrt(0.64 + 0.01 + 1.44 + 0.25);
  const double U = polar_U(G, p);
  const double expect = std::log(u) + 5 * std::log(1.5) - U * U * 1.5 * 1.5 / 4;
  CHECK(log_pj_estimate(G, p) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("lemma 6 ratio is even in eta") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  const PolarPoint p{{0.5, 0.2, 0.7, -0.1}, 2.0};
  const PolarPoint q{p.u, -2.0};
  const auto a = lemma6_ratio(G, p), b = lemma6_ratio(G, q);
  CHECK(std::isfinite(a.ratio));
  CHECK(a.ratio == doctest::Approx(b.ratio).epsilon(1e-8));
}

TEST_CASE("horizontal path speed equals U|eta|") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  const auto f = TestFunction::constant(7, 1.0);
  for (const auto& p : sample_polar_points(G, 10, 13)) CHECK(horizontal_path_check(G, p, f).pass);
}
