// Serial reference against the OpenMP kernels: wall time and bitwise agreement.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include "nhg/heat_kernel.hpp"
#include "nhg/rng.hpp"
#include "nhg/semigroup.hpp"

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-22s %10.4f %10.4f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t paths = 20000;
  std::size_t points = 200000;
  if (argc > 1) paths = std::stoul(argv[1]);
  if (argc > 2) points = std::stoul(argv[2]);
  const nhg::GroupParams G({1, 1}, {0.5, 1.0});
  const int dim = G.dim();
  std::printf("threads %d, paths %zu, kernel points %zu\n", omp_get_max_threads(), paths, points);
  std::printf("%-22s %10s %10s %9s\n", "kernel", "serial s", "openmp s", "speedup");

  nhg::DiffusionSpec spec;
  spec.paths = paths;
  std::vector<double> a, b;
  const double ts = seconds([&] { a = nhg::sample_heat_points_serial(G, 1.0, spec); }, 2);
  const double tp = seconds([&] { b = nhg::sample_heat_points_parallel(G, 1.0, spec); }, 2);
  row("heat paths", ts, tp, a == b);

  const nhg::KernelTable table(G, 1.0, 4.0, 9.0, 1e-10);
  std::vector<double> pts(points * static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < points; ++i) {
    nhg::StreamRng rng(1, 0xbe, i);
    for (int c = 0; c < dim - 1; ++c) pts[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)] = rng.normal();
    pts[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(dim - 1)] = 3.0 * (2.0 * rng.uniform() - 1.0);
  }
  std::vector<double> va(points), vb(points);
  const double ks = seconds([&] { table.evaluate_serial(pts, va); }, 3);
  const double kp = seconds([&] { table.evaluate_parallel(pts, vb); }, 3);
  row("kernel table", ks, kp, va == vb);
  return 0;
}
