#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhg/config.hpp"
#include "nhg/distance.hpp"
#include "nhg/errors.hpp"
#include "nhg/heat_kernel.hpp"
#include "nhg/suites.hpp"

#ifndef NHG_DEFAULT_DATA_DIR
#define NHG_DEFAULT_DATA_DIR "data"
#endif

namespace {

using nlohmann::json;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<int> k;
  std::vector<double> a;
  std::optional<int> workers;
  std::string data_dir = NHG_DEFAULT_DATA_DIR;
  std::optional<std::size_t> paths;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON run configuration");
    app->add_option("--seed", seed, "override the config seed");
    app->add_option("--k", k, "block sizes k_1 ... k_l (overrides the config group)")->delimiter(',');
    app->add_option("--a", a, "coefficients a_1 < ... < a_l = 1")->delimiter(',');
    app->add_option("-j,--workers", workers, "OpenMP worker count (results do not depend on it)");
    app->add_option("--data-dir", data_dir, "directory holding the family and frozen-bound files");
    app->add_option("--paths", paths, "diffusion path count");
  }

  // File values first, then flags on top.
  nhg::RunConfig resolve(const std::vector<std::string>& suites, const std::string& output_dir,
                         bool need_seed = true) const {
    json j = json::object();
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw nhg::UsageError("cannot open config " + config);
      try {
        j = json::parse(in, nullptr, true, true);
      } catch (const json::parse_error& e) {
        throw nhg::UsageError("config " + config + ": " + e.what());
      }
    }
    if (seed) j["seed"] = *seed;
    if (!need_seed && !j.contains("seed")) j["seed"] = 0;
    if (!k.empty() || !a.empty()) j["group"] = {{"k", k}, {"a", a}};
    if (!j.contains("group")) j["group"] = {{"k", {1}}, {"a", {1.0}}};
    if (workers) j["workers"] = *workers;
    if (paths) j["diffusion"]["paths"] = *paths;
    if (!suites.empty()) j["suites"] = suites;
    if (!output_dir.empty()) j["output_dir"] = output_dir;
    return nhg::parse_config(j, data_dir);
  }
};

std::vector<double> parse_point(const std::string& s, int dim) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw nhg::UsageError("bad coordinate '" + item + "'");
    }
  }
  if (static_cast<int>(v.size()) != dim)
    throw nhg::UsageError("point needs " + std::to_string(dim) + " comma-separated coordinates");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat kernel, distance and functional-inequality checks on nonisotropic Heisenberg groups"};
  app.require_subcommand(1);
  app.footer(nhg::plot_columns_help() +
             "Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage or configuration error.");

  Common common;
  std::vector<std::string> suites;
  std::string output_dir;
  bool freeze = false;
  auto* verify = app.add_subcommand("verify", "run verification suites and write JSON reports");
  common.attach(verify);
  verify->add_option("suites", suites,
                     "group distance kernel polar lemma6 li lse-poe cheeger identities | inequality | all");
  verify->add_option("-o,--output-dir", output_dir, "report directory");
  verify->add_flag("--freeze", freeze, "record regression values of passing suites in the frozen-bounds file");

  std::string what, point;
  double h = 1.0;
  auto* eval = app.add_subcommand("eval", "evaluate the heat kernel or the CC distance at one point");
  common.attach(eval);
  eval->add_option("quantity", what, "kernel | distance")->required()->check(CLI::IsMember({"kernel", "distance"}));
  eval->add_option("-p,--point", point, "x11,y11,...,t (use --point=... for a leading minus sign)")->required();
  eval->add_option("--time", h, "heat time h for the kernel");

  std::string quantity, output;
  nhg::PlotOptions plot_opt;
  auto* plot = app.add_subcommand("plot", "write CSV data for external plotting");
  common.attach(plot);
  plot->add_option("quantity", quantity, "kernel-slice | distance-sphere | ratio-cloud")->required();
  plot->add_option("-o,--output", output, "CSV file (default stdout)");
  plot->add_option("--time", plot_opt.h, "heat time h for kernel-slice");
  plot->add_option("--radii", plot_opt.radii, "block radii for kernel-slice")->delimiter(',');
  plot->add_option("--t-extent", plot_opt.t_extent, "kernel-slice covers |t| <= this");
  plot->add_option("--resolution", plot_opt.resolution, "samples per slice or per direction");
  plot->add_option("--directions", plot_opt.directions, "z-directions for distance-sphere");
  plot->add_option("--source", plot_opt.ratio_source, "ratio-cloud source: lemma6 | li");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      if (suites.empty() && common.config.empty()) throw nhg::UsageError("no suite selected");
      const nhg::RunConfig cfg = common.resolve(suites, output_dir);
      if (cfg.suites.empty()) throw nhg::UsageError("no suite selected");
      const auto outcome = nhg::run(cfg, freeze, &std::cerr);
      for (const auto& r : outcome.results) {
        if (!r.pass) {
          std::cerr << "suite " << r.suite << " failed:";
          for (const auto& id : r.failing()) std::cerr << ' ' << id;
          std::cerr << '\n';
        }
      }
      return outcome.exit_code;
    }
    if (eval->parsed()) {
      const nhg::RunConfig cfg = common.resolve({}, {}, false);
      const nhg::GroupPoint g(parse_point(point, cfg.group.dim()));
      json out;
      out["params"] = nhg::group_to_json(cfg.group);
      out["point"] = g.coords();
      if (what == "kernel") {
        if (!(h > 0.0)) throw nhg::UsageError("h must be positive");
        const auto v = nhg::log_kernel(cfg.group, h, g, cfg.quadrature);
        out["h"] = h;
        out["value"] = std::exp(v.log_value);
        out["log_value"] = v.log_value;
        out["rel_error"] = v.rel_error;
      } else {
        out["distance"] = nhg::distance(cfg.group, g);
        bool origin = true;
        for (double c : g.coords()) origin = origin && c == 0.0;
        if (!origin) {
          const auto th = nhg::solve_theta(cfg.group, g);
          out["theta"] = th.theta;
          out["branch"] = nhg::to_string(th.branch);
        }
      }
      std::cout << nhg::dump_json(out) << '\n';
      return 0;
    }
    if (plot->parsed()) {
      const nhg::RunConfig cfg = common.resolve({}, {}, false);
      if (std::find(nhg::plot_quantities().begin(), nhg::plot_quantities().end(), quantity) ==
          nhg::plot_quantities().end())
        throw nhg::UsageError("unsupported plot quantity '" + quantity + "'");
      if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
      if (output.empty()) {
        nhg::emit_plot_data(cfg, quantity, std::cout, plot_opt);
      } else {
        std::ofstream out(output);
        if (!out) throw nhg::UsageError("cannot write " + output);
        nhg::emit_plot_data(cfg, quantity, out, plot_opt);
      }
      return 0;
    }
  } catch (const nhg::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const nhg::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
