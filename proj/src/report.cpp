#include "nhg/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nhg {

void VerificationReport::summarize_ratios() {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool finite = true;
  const std::size_t m = std::min(left.size(), right.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double r = left[i] / right[i];
    if (!std::isfinite(r)) {
      finite = false;
      continue;
    }
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (m == 0) finite = false;
  min_ratio = lo;
  max_ratio = hi;
  constant = hi;
  if (!finite) flags.push_back("non-finite ratio");
}

bool VerificationReport::judge_band() {
  bool ok = std::isfinite(min_ratio) && std::isfinite(max_ratio);
  for (const auto& f : flags) {
    if (f == "non-finite ratio") ok = false;
  }
  if (bound_lo && !(min_ratio >= *bound_lo)) ok = false;
  if (bound_hi && !(max_ratio <= *bound_hi)) ok = false;
  pass = ok;
  return ok;
}

namespace {
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

nlohmann::json numbers(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}
}  // namespace

nlohmann::json VerificationReport::to_json(bool include_samples) const {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["id"] = id;
  j["description"] = description;
  j["samples"] = std::max(left.size(), right.size());
  j["constant"] = number(constant);
  j["min_ratio"] = number(min_ratio);
  j["max_ratio"] = number(max_ratio);
  j["tolerance"] = tolerance;
  j["bound_lo"] = bound_lo ? number(*bound_lo) : nlohmann::json(nullptr);
  j["bound_hi"] = bound_hi ? number(*bound_hi) : nlohmann::json(nullptr);
  j["excluded"] = excluded;
  j["flags"] = flags;
  j["pass"] = pass;
  j["seed"] = seed;
  j["extra"] = extra;
  if (!standard_errors.empty()) {
    double mx = 0.0;
    for (double s : standard_errors) mx = std::max(mx, s);
    j["max_standard_error"] = number(mx);
  }
  if (include_samples) {
    j["left"] = numbers(left);
    j["right"] = numbers(right);
    if (!standard_errors.empty()) j["standard_errors"] = numbers(standard_errors);
  }
  return j;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2); }

}  // namespace nhg
