#include <doctest.h>

#include <cmath>

#include "nhg/semigroup.hpp"

using namespace nhg;

namespace {

struct Moments {
  double mean = 0.0, se = 0.0;
};

template <class F>
Moments moments(const HeatSample& s, F&& f) {
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = f(s.point(i));
    a += v;
    b += v * v;
  }
  const double n = static_cast<double>(s.size());
  const double m = a / n;
  return {m, std::sqrt((b / n - m * m) / n)};
}

}  // namespace

TEST_CASE("second moments of the diffusion") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  DiffusionSpec spec;
  spec.paths = 20000;
  spec.seed = 4;
  const HeatSample s(G, spec);
  const auto z2 = moments(s, [](std::span<const double> p) {
    double r = 0.0;
    for (std::size_t c = 0; c + 1 < p.size(); ++c) r += p[c] * p[c];
    return r;
  });
  CHECK(std::abs(z2.mean - 4.0 * G.n()) < 3.0 * z2.se);
  // each block contributes Var t = 16 a^2 h^2
  const auto t2 = moments(s, [](std::span<const double> p) { return p.back() * p.back(); });
  CHECK(std::abs(t2.mean - 16.0 * (0.25 + 1.0)) < 3.0 * t2.se);
}

TEST_CASE("serial and parallel sampling agree bitwise") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  DiffusionSpec spec;
  spec.paths = 500;
  spec.steps = 20;
  CHECK(sample_heat_points_serial(G, 0.7, spec) == sample_heat_points_parallel(G, 0.7, spec));
  const auto p = sample_heat_point(G, 0.7, spec, 17);
  const auto all = sample_heat_points_serial(G, 0.7, spec);
  for (std::size_t c = 0; c < 7; ++c) CHECK(p[c] == all[17 * 7 + c]);
}

TEST_CASE("small h concentrates at the origin") {
  const GroupParams G({1}, {1.0});
  DiffusionSpec spec;
  spec.paths = 4000;
  double prev = 1e300;
  for (double h : {1.0, 0.1, 0.01}) {
    const auto pts = sample_heat_points_serial(G, h, spec);
    double m = 0.0;
    for (std::size_t i = 0; i < spec.paths; ++i) m += pts[3 * i] * pts[3 * i] + pts[3 * i + 1] * pts[3 * i + 1];
    m /= static_cast<double>(spec.paths);
    CHECK(m < prev);
    CHECK(m == doctest::Approx(4.0 * h).epsilon(0.1));
    prev = m;
  }
}

TEST_CASE("endpoint histogram against kernel bin masses") {
  const GroupParams G({1}, {1.0});
  DiffusionSpec spec;
  spec.paths = 20000;
  const HeatSample s(G, spec);
  CHECK(check_histogram(G, s, 1.0).pass);
}
