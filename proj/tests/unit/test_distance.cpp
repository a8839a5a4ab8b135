#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nhg/distance.hpp"
#include "nhg/errors.hpp"
#include "nhg/rng.hpp"

using namespace nhg;
using std::numbers::pi;

TEST_CASE("mu values and inverse") {
  CHECK(mu(0.0) == 0.0);
  CHECK(mu(pi / 2) == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(mu(-0.7) == doctest::Approx(-mu(0.7)).epsilon(1e-15));
  for (double w : {1e-6, 1e-3, 0.3, 1.0, 2.5, 3.1}) {
    const double direct = (2 * w - std::sin(2 * w)) / (2 * std::sin(w) * std::sin(w));
    CHECK(mu(w) == doctest::Approx(direct).epsilon(w < 1e-3 ? 1e-6 : 1e-12));
  }
  CHECK_THROWS_AS(mu(pi), DomainError);
  CHECK_THROWS_AS(mu(-4.0), DomainError);
  CHECK(mu_inverse(0.0) == 0.0);
  StreamRng rng(3, 1, 0);
  for (int i = 0; i < 200; ++i) {
    const double w = (2 * rng.uniform() - 1) * 3.0;
    CHECK(mu_inverse(mu(w)) == doctest::Approx(w).epsilon(1e-12).scale(1.0));
  }
  const double near = mu_inverse(1e9);
  CHECK(std::abs(near - pi) < 1e-3);
  CHECK(mu_near_pi(pi - near) == doctest::Approx(1e9).epsilon(1e-9));
}

TEST_CASE("theta branches") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  const auto s0 = solve_theta(G, GroupPoint({1.0, 0.5, 0.3, -0.2, 0.0}));
  CHECK(s0.theta == 0.0);
  CHECK(s0.branch == ThetaBranch::interior);
  const auto sb = solve_theta(G, GroupPoint({0.0, 0.0, 0.0, 0.0, 2.0}));
  CHECK(sb.branch == ThetaBranch::zl_zero_boundary);
  CHECK(sb.at_pi);
  CHECK(sb.theta > 0);
  // sum_{j<l} a_j mu(a_j pi) |z_j|^2 = 0.5 mu(pi/2) 4 = pi
  const auto si = solve_theta(G, GroupPoint({2.0, 0.0, 0.0, 0.0, 1.0}));
  CHECK(si.branch == ThetaBranch::zl_zero_interior);
  const auto so = solve_theta(G, GroupPoint({2.0, 0.0, 0.0, 0.0, 4.0}));
  CHECK(so.branch == ThetaBranch::zl_zero_boundary);
  CHECK_THROWS_AS(solve_theta(G, GroupPoint::zeros(5)), DomainError);
  const GroupPoint g({0.4, -1.1, 0.7, 0.2, -1.3});
  const auto s = solve_theta(G, g);
  const auto rho = block_norms(G, g.coords());
  CHECK(std::abs(theta_map(G, rho, s.theta) - g.t()) <= 1e-12 * (1 + std::abs(g.t())));
  CHECK(s.theta < 0);
}

TEST_CASE("distance anchors") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  GroupPoint z({0.3, -0.4, 1.0, 0.0, 0.0, 2.0, 0.0});
  CHECK(distance(G, z) == doctest::Approx(std::sqrt(0.25 + 1.0 + 4.0)).epsilon(1e-14));
  for (double t : {1e-4, 0.5, 3.0, -7.0}) {
    GroupPoint p = GroupPoint::zeros(7);
    p[6] = t;
    CHECK(distance(G, p) == doctest::Approx(std::sqrt(pi * std::abs(t))).epsilon(1e-12));
  }
  CHECK(distance(G, GroupPoint::zeros(7)) == 0.0);
  CHECK(epsilon0(G, z) == 1.0);
  GroupPoint p = GroupPoint::zeros(7);
  p[6] = 1.0;
  CHECK_THROWS_AS(epsilon0(G, p), BranchError);
}

TEST_CASE("epsilon0 shrinks as z_l vanishes") {
  const GroupParams G({1}, {1.0});
  double prev = 1.0;
  for (double r : {1.0, 0.1, 0.01, 0.001}) {
    const double e = epsilon0(G, GroupPoint({r, 0.0, 1.0}));
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("interior forms agree, homogeneity, symmetry") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  StreamRng rng(8, 2, 0);
  for (int i = 0; i < 200; ++i) {
    GroupPoint g = GroupPoint::zeros(7);
    for (auto& c : g.coords()) c = 2 * rng.normal();
    const auto [d1, d2] = distance_squared_forms(G, g);
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-10));
    const double d = distance(G, g);
    CHECK(distance(G, dilate(2.5, g)) == doctest::Approx(2.5 * d).epsilon(1e-10));
    CHECK(distance(G, inverse(g)) == doctest::Approx(d).epsilon(1e-12));
  }
}

TEST_CASE("equivalence ratio anchors") {
  const GroupParams G({1}, {1.0});
  const GroupPoint z({0.6, 0.8, 0.0});
  CHECK(distance_squared(G, z) / 1.0 == doctest::Approx(1.0));
  const GroupPoint t({0.0, 0.0, 2.0});
  CHECK(distance_squared(G, t) / 2.0 == doctest::Approx(pi));
  SampleSpec spec;
  spec.count = 2000;
  const auto rep = check_distance_equivalence(GroupParams({1, 2}, {0.5, 1.0}), spec);
  CHECK(rep.min_ratio > 0.0);
  CHECK(std::isfinite(rep.max_ratio));
}
