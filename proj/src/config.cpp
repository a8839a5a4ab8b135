#include "nhg/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nhg/errors.hpp"

namespace nhg {

namespace {

using nlohmann::json;

// Reads one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw UsageError(name_ + " must be an object");
  }
  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw UsageError("unknown key '" + key + "' in " + name_);
    }
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError(name_ + "." + key + " has the wrong type");
    }
  }
  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string(what) + " must be positive");
}

void nonzero(std::size_t v, const char* what) {
  if (v == 0) throw UsageError(std::string(what) + " must be at least 1");
}

}  // namespace

nlohmann::json group_to_json(const GroupParams& params) {
  return json{{"l", params.blocks()}, {"k", params.k()}, {"a", params.a()}};
}

GroupParams group_from_json(const nlohmann::json& j) {
  Section s(j, "group");
  std::vector<int> k;
  std::vector<double> a;
  int l = -1;
  s.get("k", k);
  s.get("a", a);
  s.get("l", l);
  if (l >= 0 && static_cast<std::size_t>(l) != k.size()) throw UsageError("group.l disagrees with the length of k");
  try {
    s.done();
    return GroupParams(k, a);
  } catch (const ParameterError& e) {
    throw UsageError(std::string("group: ") + e.what());
  }
}

RunConfig parse_config(const nlohmann::json& j, const std::string& data_dir) {
  RunConfig cfg;
  cfg.data_dir = data_dir;
  Section root(j, "config");
  if (!root.has("seed")) throw UsageError("config needs a seed");
  root.get("seed", cfg.seed);
  if (!root.has("group")) throw UsageError("config needs a group");
  cfg.group = group_from_json(root.at("group"));
  if (root.has("suites")) {
    root.get("suites", cfg.suites);
    if (cfg.suites.empty()) throw UsageError("empty suite selection");
  }
  root.get("output_dir", cfg.output_dir);
  root.get("frozen_bounds", cfg.frozen_bounds);
  root.get("workers", cfg.workers);
  std::string dd;
  root.get("data_dir", dd);
  if (!dd.empty()) cfg.data_dir = dd;

  if (root.has("quadrature")) {
    Section s(root.at("quadrature"), "quadrature");
    auto& q = cfg.quadrature;
    s.get("rel_tol", q.rel_tol);
    s.get("max_lambda", q.max_lambda);
    s.get("panel_budget", q.panel_budget);
    s.get("panels_per_period", q.panels_per_period);
    s.get("ray_threshold", q.ray_threshold);
    s.done();
  }
  cfg.diffusion.seed = cfg.seed;
  if (root.has("diffusion")) {
    Section s(root.at("diffusion"), "diffusion");
    auto& d = cfg.diffusion;
    s.get("steps", d.steps);
    s.get("paths", d.paths);
    std::string levy;
    s.get("levy", levy);
    if (levy == "bridge") d.levy = LevyRule::bridge;
    else if (levy == "trapezoid") d.levy = LevyRule::trapezoid;
    else if (!levy.empty()) throw UsageError("diffusion.levy must be 'bridge' or 'trapezoid'");
    s.done();
  }
  if (root.has("grid")) {
    Section s(root.at("grid"), "grid");
    s.get("radial", cfg.grid.radial);
    s.get("angular", cfg.grid.angular);
    s.get("kernel_tol", cfg.grid.kernel_tol);
    s.done();
  }
  cfg.distance_cloud.seed = cfg.seed;
  if (root.has("distance")) {
    Section s(root.at("distance"), "distance");
    auto& c = cfg.distance_cloud;
    s.get("count", c.count);
    s.get("z_max", c.z_max);
    s.get("t_max", c.t_max);
    s.get("degenerate_fraction", c.degenerate_fraction);
    s.done();
  }
  if (root.has("group_suite")) {
    Section s(root.at("group_suite"), "group_suite");
    auto& g = cfg.group_suite;
    if (s.has("param_sets")) {
      const auto& arr = s.at("param_sets");
      if (!arr.is_array()) throw UsageError("group_suite.param_sets must be an array");
      for (const auto& e : arr) g.param_sets.push_back(group_from_json(e));
    }
    s.get("cases", g.cases);
    s.get("measure_cases", g.measure_cases);
    s.get("measure_samples", g.measure_samples);
    s.done();
  }
  if (root.has("kernel")) {
    Section s(root.at("kernel"), "kernel");
    auto& k = cfg.kernel_suite;
    s.get("scaling_cases", k.scaling_cases);
    s.get("symmetry_points", k.symmetry_points);
    s.get("symmetry_hs", k.symmetry_hs);
    s.get("lemma1_points", k.lemma1_points);
    s.get("lemma2_points", k.lemma2_points);
    s.get("lemma2_hs", k.lemma2_hs);
    s.get("z_max", k.z_max);
    s.get("t_max", k.t_max);
    s.done();
  }
  if (root.has("polar")) {
    Section s(root.at("polar"), "polar");
    auto& p = cfg.polar_suite;
    s.get("points", p.points);
    s.get("matrices", p.matrices);
    s.get("paths", p.paths);
    s.get("cov_samples", p.cov_samples);
    s.get("u_max", p.u_max);
    s.done();
  }
  if (root.has("lemma6")) {
    Section s(root.at("lemma6"), "lemma6");
    auto& l6 = cfg.lemma6_suite;
    s.get("count", l6.count);
    s.get("max_distance", l6.max_distance);
    s.get("kernel_rel_tol", l6.kernel_rel_tol);
    s.done();
  }
  if (root.has("inequality")) {
    Section s(root.at("inequality"), "inequality");
    auto& in = cfg.inequality_suite;
    s.get("family", in.family);
    s.get("points", in.points);
    s.get("point_scale", in.point_scale);
    s.get("hs", in.hs);
    s.get("ball_count", in.ball_count);
    s.get("identity_cases", in.identity_cases);
    s.get("markov_hs", in.markov_hs);
    s.done();
  }
  root.done();
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::string& data_dir) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  return parse_config(j, data_dir);
}

void validate(const RunConfig& cfg) {
  if (cfg.quadrature.rel_tol <= 0.0 || cfg.quadrature.panel_budget < 1) throw UsageError("bad quadrature spec");
  try {
    validate(cfg.diffusion);
  } catch (const ParameterError& e) {
    throw UsageError(std::string("diffusion: ") + e.what());
  }
  if (cfg.grid.radial < 2 || cfg.grid.angular < 2) throw UsageError("grid needs at least 2 nodes per direction");
  nonzero(cfg.distance_cloud.count, "distance.count");
  positive(cfg.distance_cloud.z_max, "distance.z_max");
  positive(cfg.distance_cloud.t_max, "distance.t_max");
  if (cfg.distance_cloud.degenerate_fraction < 0.0 || cfg.distance_cloud.degenerate_fraction > 1.0)
    throw UsageError("distance.degenerate_fraction must lie in [0, 1]");
  nonzero(cfg.group_suite.cases, "group_suite.cases");
  nonzero(cfg.kernel_suite.scaling_cases, "kernel.scaling_cases");
  for (double h : cfg.kernel_suite.lemma2_hs) positive(h, "kernel.lemma2_hs");
  for (double h : cfg.kernel_suite.symmetry_hs) positive(h, "kernel.symmetry_hs");
  positive(cfg.kernel_suite.z_max, "kernel.z_max");
  positive(cfg.kernel_suite.t_max, "kernel.t_max");
  nonzero(cfg.polar_suite.points, "polar.points");
  positive(cfg.polar_suite.u_max, "polar.u_max");
  nonzero(cfg.lemma6_suite.count, "lemma6.count");
  if (!(cfg.lemma6_suite.max_distance > 1.0)) throw UsageError("lemma6.max_distance must exceed 1");
  nonzero(cfg.inequality_suite.points, "inequality.points");
  if (cfg.inequality_suite.hs.empty()) throw UsageError("inequality.hs is empty");
  for (double h : cfg.inequality_suite.hs) positive(h, "inequality.hs");
  for (double h : cfg.inequality_suite.markov_hs) positive(h, "inequality.markov_hs");
  positive(cfg.inequality_suite.point_scale, "inequality.point_scale");
  if (cfg.workers < 0) throw UsageError("workers must be >= 0");
  if (!cfg.suites.empty()) expand_suites(cfg.suites);
}

std::vector<std::string> expand_suites(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  auto add = [&](const std::string& s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  };
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto& s : known_suites()) add(s);
    } else if (n == "inequality") {
      for (const char* s : {"li", "lse-poe", "cheeger", "identities"}) add(s);
    } else if (std::find(known_suites().begin(), known_suites().end(), n) != known_suites().end()) {
      add(n);
    } else {
      throw UsageError("unknown suite '" + n + "'");
    }
  }
  if (out.empty()) throw UsageError("no suite selected");
  return out;
}

nlohmann::json to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["group"] = group_to_json(cfg.group);
  const auto& q = cfg.quadrature;
  j["quadrature"] = {{"rel_tol", q.rel_tol},
                     {"max_lambda", q.max_lambda},
                     {"panel_budget", q.panel_budget},
                     {"panels_per_period", q.panels_per_period},
                     {"ray_threshold", q.ray_threshold}};
  const auto& d = cfg.diffusion;
  j["diffusion"] = {{"steps", d.steps},
                    {"paths", d.paths},
                    {"levy", d.levy == LevyRule::bridge ? "bridge" : "trapezoid"}};
  j["grid"] = {{"radial", cfg.grid.radial}, {"angular", cfg.grid.angular}, {"kernel_tol", cfg.grid.kernel_tol}};
  const auto& c = cfg.distance_cloud;
  j["distance"] = {{"count", c.count},
                   {"z_max", c.z_max},
                   {"t_max", c.t_max},
                   {"degenerate_fraction", c.degenerate_fraction}};
  json sets = json::array();
  for (const auto& p : cfg.group_suite.param_sets) sets.push_back(group_to_json(p));
  j["group_suite"] = {{"param_sets", sets},
                      {"cases", cfg.group_suite.cases},
                      {"measure_cases", cfg.group_suite.measure_cases},
                      {"measure_samples", cfg.group_suite.measure_samples}};
  const auto& k = cfg.kernel_suite;
  j["kernel"] = {{"scaling_cases", k.scaling_cases}, {"symmetry_points", k.symmetry_points},
                 {"symmetry_hs", k.symmetry_hs},     {"lemma1_points", k.lemma1_points},
                 {"lemma2_points", k.lemma2_points}, {"lemma2_hs", k.lemma2_hs},
                 {"z_max", k.z_max},                 {"t_max", k.t_max}};
  const auto& p = cfg.polar_suite;
  j["polar"] = {{"points", p.points},
                {"matrices", p.matrices},
                {"paths", p.paths},
                {"cov_samples", p.cov_samples},
                {"u_max", p.u_max}};
  const auto& l6 = cfg.lemma6_suite;
  j["lemma6"] = {{"count", l6.count}, {"max_distance", l6.max_distance}, {"kernel_rel_tol", l6.kernel_rel_tol}};
  const auto& in = cfg.inequality_suite;
  j["inequality"] = {{"family", in.family},         {"points", in.points},
                     {"point_scale", in.point_scale}, {"hs", in.hs},
                     {"ball_count", in.ball_count},   {"identity_cases", in.identity_cases},
                     {"markov_hs", in.markov_hs}};
  j["suites"] = cfg.suites;
  j["frozen_bounds"] = cfg.frozen_bounds;
  return j;
}

std::string resolve_data_path(const RunConfig& cfg, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.is_absolute() || fs::exists(p) || cfg.data_dir.empty()) return path;
  return (fs::path(cfg.data_dir) / p).string();
}

}  // namespace nhg
