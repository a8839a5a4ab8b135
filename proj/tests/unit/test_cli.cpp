#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args, const std::string& stdout_file = "/dev/null") {
  const std::string cmd = std::string(NHG_CLI_PATH) + " " + args + " > " + stdout_file + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nhg_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::vector<double>> csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("") == 2);
  CHECK(run("verify") == 2);
  CHECK(run("verify --seed 1 nonsense") == 2);
  CHECK(run("verify --seed 1 kernel --k 1 --a 0.5") == 2);
  CHECK(run("verify kernel") == 2);
  CHECK(run("plot histogram --seed 1") == 2);
  CHECK(run("eval kernel -p 0,0") == 2);
  CHECK(run("verify -c /nonexistent/config.json") == 2);
}

TEST_CASE("H1 kernel suite reports 1/64 and reruns byte for byte") {
  const auto dir = scratch("kernel");
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << json{{"seed", 5},
                {"group", {{"k", {1}}, {"a", {1.0}}}},
                {"suites", {"kernel"}},
                {"kernel", {{"scaling_cases", 20}, {"symmetry_points", 5}, {"lemma1_points", 20}, {"lemma2_points", 5}}}};
  }
  const std::string common = "verify --data-dir " + dir.string() + " -c " + (dir / "cfg.json").string();
  REQUIRE(run(common + " -o " + (dir / "a").string()) == 0);
  REQUIRE(run(common + " -j 1 -o " + (dir / "b").string()) == 0);
  const auto a = slurp(dir / "a" / "kernel.json");
  CHECK(a == slurp(dir / "b" / "kernel.json"));
  const auto j = json::parse(a);
  bool found = false;
  for (const auto& r : j["reports"]) {
    if (r["id"] == "kernel-anchor") {
      found = true;
      CHECK(std::abs(r["left"][0].get<double>() - 1.0 / 64.0) < 1e-6);
      CHECK(r["pass"].get<bool>());
    }
  }
  CHECK(found);
  CHECK(j["seed"] == 5);
  CHECK(j["config"]["group"]["k"] == json{1});
  CHECK(fs::exists(dir / "a" / "summary.json"));
}

TEST_CASE("eval prints JSON") {
  const auto dir = scratch("eval");
  REQUIRE(run("eval kernel --k 1 --a 1 --point=0,0,0", (dir / "k.json").string()) == 0);
  const auto k = json::parse(slurp(dir / "k.json"));
  CHECK(std::abs(k["value"].get<double>() - 1.0 / 64.0) < 1e-9);
  REQUIRE(run("eval distance --k 1 --a 1 --point=0,0,-2", (dir / "d.json").string()) == 0);
  const auto d = json::parse(slurp(dir / "d.json"));
  CHECK(d["distance"].get<double>() == doctest::Approx(std::sqrt(2 * M_PI)).epsilon(1e-12));
}

TEST_CASE("distance-sphere points lie on the unit sphere") {
  const auto dir = scratch("sphere");
  REQUIRE(run("plot distance-sphere --k 1 --a 1 --directions 8 --resolution 21 -o " + (dir / "s.csv").string()) == 0);
  const auto rows = csv(dir / "s.csv");
  CHECK(rows.size() == 8 * 21);
  for (const auto& r : rows) CHECK(std::abs(r.back() - 1.0) <= 1e-6);
}

TEST_CASE("kernel-slice at z = 0 is even in t") {
  const auto dir = scratch("slice");
  REQUIRE(run("plot kernel-slice --k 1,1 --a 0.5,1 --radii 0 --resolution 41 -o " + (dir / "k.csv").string()) == 0);
  const auto rows = csv(dir / "k.csv");
  REQUIRE(rows.size() == 41);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[rows.size() - 1 - i];
    CHECK(a[1] == doctest::Approx(-b[1]).scale(1.0));
    CHECK(a[3] == doctest::Approx(b[3]).epsilon(1e-10));
  }
}
