#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nhg/group.hpp"
#include "nhg/heat_kernel.hpp"
#include "nhg/rng.hpp"

using namespace nhg;
using std::numbers::pi;

namespace {

// Trapezoid sum of lambda / sinh(lambda) over the real line; the integrand is analytic
// in a strip, so the error decays exponentially in 1/step.
double lambda_over_sinh_integral() {
  const double step = 1e-3;
  double s = 1.0;  // value at 0, counted once
  for (int i = 1; i * step < 60.0; ++i) {
    const double x = i * step;
    s += 2.0 * x / std::sinh(x);
  }
  return s * step;
}

GroupPoint random_point(int dim, std::uint64_t i) {
  StreamRng rng(11, 0x33, i);
  GroupPoint g = GroupPoint::zeros(dim);
  for (auto& c : g.coords()) c = rng.normal();
  return g;
}

}  // namespace

TEST_CASE("classical H1 kernel at the origin") {
  const double I = lambda_over_sinh_integral();
  CHECK(I == doctest::Approx(pi * pi / 2).epsilon(1e-12));
  const double oracle = I / (2.0 * std::pow(4.0 * pi, 2));
  const GroupParams G({1}, {1.0});
  const auto v = kernel(G, 1.0, origin(G));
  CHECK(std::abs(v.value - oracle) < 1e-10);
  CHECK(std::abs(v.value - 1.0 / 64.0) < 1e-6);
}

TEST_CASE("kernel parity and inversion symmetry") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  for (std::uint64_t i = 0; i < 5; ++i) {
    auto g = random_point(7, i);
    const double p = kernel(G, 0.8, g).value;
    CHECK(p > 0);
    CHECK(kernel(G, 0.8, inverse(g)).value == doctest::Approx(p).epsilon(1e-10));
    auto gt = g;
    gt[6] = -gt[6];
    CHECK(kernel(G, 0.8, gt).value == doctest::Approx(p).epsilon(1e-10));
    auto gz = g;
    for (int c = 0; c < 6; ++c) gz[static_cast<std::size_t>(c)] = -gz[static_cast<std::size_t>(c)];
    CHECK(kernel(G, 0.8, gz).value == doctest::Approx(p).epsilon(1e-10));
  }
}

TEST_CASE("scaling substitution at h = 4") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  const auto g = random_point(5, 7);
  auto g4 = dilate(2.0, g);
  const double lhs = std::pow(4.0, G.n() + 1) * kernel(G, 4.0, g4).value;
  CHECK(lhs == doctest::Approx(kernel(G, 1.0, g).value).epsilon(1e-10));
  CHECK(check_scaling(G, 1.0, g).constant == 0.0);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto rep = check_scaling(G, 0.3 + i, random_point(5, 20 + i));
    CHECK(rep.constant <= 1e-8);
  }
}

TEST_CASE("log gradients") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  for (double c : log_kernel_left_gradient(G, 1.0, origin(G))) CHECK(c == doctest::Approx(0.0).scale(1.0));
  auto g0 = random_point(7, 40);
  g0[6] = 0.0;
  CHECK(std::abs(log_kernel_t_derivative(G, 1.0, g0)) < 1e-12);

  const double eps = 1e-5;
  for (std::uint64_t i = 0; i < 3; ++i) {
    const auto g = random_point(7, 50 + i);
    const auto grad = log_kernel_euclidean_gradient(G, 0.7, g);
    for (std::size_t c = 0; c < 7; ++c) {
      auto a = g, b = g;
      a[c] += eps;
      b[c] -= eps;
      const double fd = (log_kernel(G, 0.7, a).log_value - log_kernel(G, 0.7, b).log_value) / (2 * eps);
      CHECK(grad[c] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
    CHECK(log_kernel_t_derivative(G, 0.7, g) == doctest::Approx(grad[6]).epsilon(1e-10));
    // left field X = d/dx + 2 a y d/dt on log p
    const auto left = log_kernel_left_gradient(G, 0.7, g);
    for (int m = 0; m < G.n(); ++m) {
      const double x = grad[2 * static_cast<std::size_t>(m)] + 2 * G.coef(m) * g.y(m) * grad[6];
      CHECK(left[2 * static_cast<std::size_t>(m)] == doctest::Approx(x).epsilon(1e-10));
    }
  }
}

TEST_CASE("kernel table agrees with the adaptive kernel") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  const KernelTable table(G, 1.0, 4.0, 9.0, 1e-12);
  const double p0 = kernel(G, 1.0, origin(G)).value;
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto g = random_point(5, 60 + i);
    CHECK(std::abs(table(g.coords()) - kernel(G, 1.0, g).value) < 1e-9 * p0);
  }
}

TEST_CASE("symmetry report and lemma 2 stay finite") {
  const GroupParams G({1, 2}, {0.5, 1.0});
  std::vector<GroupPoint> pts;
  for (std::uint64_t i = 0; i < 5; ++i) pts.push_back(random_point(7, 80 + i));
  CHECK(check_kernel_symmetry(G, 1.0, pts).pass);
  const std::vector<double> hs{0.5, 2.0};
  const auto [t, grad] = check_lemma2(G, pts, hs);
  CHECK(std::isfinite(t.constant));
  CHECK(std::isfinite(grad.constant));
}

TEST_CASE("lemma 1 ratio is even in t") {
  const GroupParams G({1, 1}, {0.5, 1.0});
  std::vector<GroupPoint> a{GroupPoint({0.3, 0.2, 0.5, -0.4, 0.8})};
  std::vector<GroupPoint> b{GroupPoint({0.3, 0.2, 0.5, -0.4, -0.8})};
  const auto ra = check_lemma1_estimate(G, a), rb = check_lemma1_estimate(G, b);
  CHECK(ra.max_ratio == doctest::Approx(rb.max_ratio).epsilon(1e-9));
  std::vector<GroupPoint> near{GroupPoint({1e-3, 0.0, 1e-3, 0.0, 1e-6})};
  const auto rn = check_lemma1_estimate(G, near);
  // the comparison profile tends to 1 at the origin, so R tends to p(0)
  CHECK(rn.max_ratio == doctest::Approx(kernel(G, 1.0, origin(G)).value).epsilon(1e-2));
}
