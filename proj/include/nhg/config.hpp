#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhg/distance.hpp"
#include "nhg/group.hpp"
#include "nhg/heat_kernel.hpp"
#include "nhg/polar.hpp"
#include "nhg/semigroup.hpp"

namespace nhg {

struct GroupSuiteSpec {
  /// Extra parameter sets checked alongside the run group.
  std::vector<GroupParams> param_sets;
  std::size_t cases = 10000;
  std::size_t measure_cases = 6;
  std::size_t measure_samples = 40000;
};

struct KernelSuiteSpec {
  std::size_t scaling_cases = 1000;
  std::size_t symmetry_points = 200;
  std::vector<double> symmetry_hs{0.5, 1.0, 2.0};
  std::size_t lemma1_points = 500;
  std::size_t lemma2_points = 200;
  std::vector<double> lemma2_hs{0.25, 1.0, 4.0};
  double z_max = 2.0;
  double t_max = 2.0;
};

struct PolarSuiteSpec {
  std::size_t points = 1000;
  std::size_t matrices = 1000;
  std::size_t paths = 50;
  std::size_t cov_samples = 40000;
  double u_max = 2.0;
};

struct Lemma6SuiteSpec {
  std::size_t count = 1000;
  double max_distance = 6.0;
  /// Kernel tolerance inside the v-integral.
  double kernel_rel_tol = 1e-9;
};

struct InequalitySuiteSpec {
  /// Family file; relative paths resolve against the data directory.
  std::string family = "function_family.json";
  std::size_t points = 16;
  double point_scale = 0.35;
  std::vector<double> hs{0.01, 0.05, 0.25, 1.0};
  std::size_t ball_count = 20000;
  std::size_t identity_cases = 2;
  std::vector<double> markov_hs{0.25, 1.0, 4.0};
};

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{"group", "distance", "kernel", "polar", "lemma6",
                                          "li", "lse-poe", "cheeger", "identities"};
  return s;
}

struct RunConfig {
  std::uint64_t seed = 0;
  GroupParams group{{1}, {1.0}};
  QuadratureSpec quadrature;
  DiffusionSpec diffusion;
  GridSpec grid;
  SampleSpec distance_cloud;
  GroupSuiteSpec group_suite;
  KernelSuiteSpec kernel_suite;
  PolarSuiteSpec polar_suite;
  Lemma6SuiteSpec lemma6_suite;
  InequalitySuiteSpec inequality_suite;
  std::vector<std::string> suites;
  std::string output_dir = "reports";
  std::string data_dir;
  std::string frozen_bounds = "frozen_bounds.json";
  /// 0 keeps the OpenMP default.  Never changes any reported number.
  int workers = 0;
};

/// Throws UsageError for unknown keys, missing seed, bad group data or bad suite names.
RunConfig parse_config(const nlohmann::json& j, const std::string& data_dir = {});
RunConfig load_config(const std::string& path, const std::string& data_dir = {});
/// Fully resolved config; runtime-only knobs (workers, output_dir) are left out.
nlohmann::json to_json(const RunConfig& cfg);
/// "inequality" and "all" expand; unknown names raise UsageError; empty selection raises UsageError.
std::vector<std::string> expand_suites(const std::vector<std::string>& names);
void validate(const RunConfig& cfg);

nlohmann::json group_to_json(const GroupParams& params);
GroupParams group_from_json(const nlohmann::json& j);

/// Resolves a data-file path against cfg.data_dir unless absolute or already present.
std::string resolve_data_path(const RunConfig& cfg, const std::string& path);

}  // namespace nhg
