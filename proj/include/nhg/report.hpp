#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nhg {

inline constexpr int kReportSchemaVersion = 1;

/// Outcome of one inequality or identity check.
struct VerificationReport {
  std::string id;
  std::string description;
  std::vector<double> left;
  std::vector<double> right;
  /// Sup of left/right over the retained samples (or the worst deviation for identity checks).
  double constant = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  /// Monte-Carlo standard errors, one per sample when present.
  std::vector<double> standard_errors;
  std::optional<double> bound_lo;
  std::optional<double> bound_hi;
  double tolerance = 0.0;
  std::size_t excluded = 0;
  std::vector<std::string> flags;
  bool pass = false;
  std::uint64_t seed = 0;
  nlohmann::json extra = nlohmann::json::object();

  /// Fills constant/min_ratio/max_ratio from left/right; non-finite ratios make it fail.
  void summarize_ratios();
  /// Sets pass from the frozen band, if any, and finiteness.
  bool judge_band();

  nlohmann::json to_json(bool include_samples = true) const;
};

/// Round-trip-safe rendering so identical doubles give identical bytes.
std::string dump_json(const nlohmann::json& j);

}  // namespace nhg
