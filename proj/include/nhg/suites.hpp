#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhg/config.hpp"
#include "nhg/report.hpp"

namespace nhg {

/// Regression values from the first verified run, keyed by suite and a fingerprint of the
/// config pieces that suite depends on.  Each entry maps a report id to frozen
/// {"max": ..} and/or {"min": ..}; a run passes when it lands within +-band of them.
class FrozenBounds {
 public:
  FrozenBounds() = default;
  static FrozenBounds load(const std::string& path);
  void save(const std::string& path) const;

  const nlohmann::json* find(const std::string& suite, const std::string& key) const;
  void set(const std::string& suite, const std::string& key, const nlohmann::json& entries);
  double band() const { return band_; }

 private:
  nlohmann::json entries_ = nlohmann::json::object();
  double band_ = 0.2;
};

struct SuiteResult {
  std::string suite;
  std::string key;
  std::vector<VerificationReport> reports;
  bool pass = false;
  /// Report ids checked against frozen values, and those lacking one.
  std::vector<std::string> frozen;
  std::vector<std::string> unfrozen;
  double seconds = 0.0;

  std::vector<std::string> failing() const;
  /// Everything except the timing, so reruns compare byte for byte.
  nlohmann::json to_json(const RunConfig& cfg) const;
  /// Current values of the regression quantities, in the frozen-file format.
  nlohmann::json regression_values() const;
};

/// Fingerprint of the config sections a suite reads.
std::string suite_key(const RunConfig& cfg, const std::string& suite);

/// Shares the heat sample and family sweep between inequality suites of one run.
class SuiteRunner {
 public:
  SuiteRunner(RunConfig cfg, FrozenBounds frozen);
  ~SuiteRunner();
  SuiteResult run(const std::string& suite);
  const RunConfig& config() const { return cfg_; }

 private:
  struct Cache;
  RunConfig cfg_;
  FrozenBounds frozen_;
  std::unique_ptr<Cache> cache_;
};

struct RunOutcome {
  std::vector<SuiteResult> results;
  int exit_code = 0;
};

/// Runs every selected suite, writes <output_dir>/<suite>.json and summary.json.
/// With freeze set, regression values of passing suites are written to the frozen file.
RunOutcome run(const RunConfig& cfg, bool freeze = false, std::ostream* log = nullptr);

inline const std::vector<std::string>& plot_quantities() {
  static const std::vector<std::string> q{"kernel-slice", "distance-sphere", "ratio-cloud"};
  return q;
}

struct PlotOptions {
  double h = 1.0;
  /// Block radii used by kernel-slice (z along the first real coordinate).
  std::vector<double> radii{0.0, 0.5, 1.0, 2.0};
  double t_extent = 4.0;
  std::size_t resolution = 201;
  std::size_t directions = 64;
  /// lemma6 or li.
  std::string ratio_source = "lemma6";
};

/// Writes gridded CSV; UsageError for an unknown quantity.
void emit_plot_data(const RunConfig& cfg, const std::string& quantity, std::ostream& out,
                    const PlotOptions& opt = {});

/// Column documentation for --help.
std::string plot_columns_help();

}  // namespace nhg
