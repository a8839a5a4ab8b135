#include "nhg/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "nhg/distance.hpp"
#include "nhg/errors.hpp"
#include "nhg/group_checks.hpp"
#include "nhg/heat_kernel.hpp"
#include "nhg/polar.hpp"
#include "nhg/rng.hpp"
#include "nhg/semigroup.hpp"
#include "nhg/test_function.hpp"

namespace nhg {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kScalingStream = 0x5ca1;
constexpr std::uint64_t kSweepPointStream = 0x1e9;
constexpr std::uint64_t kMatrixStream = 0x1e55;

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string group_label(const GroupParams& p) {
  std::ostringstream os;
  os << "k=";
  for (std::size_t i = 0; i < p.k().size(); ++i) os << (i ? "," : "") << p.k()[i];
  os << ";a=";
  for (std::size_t i = 0; i < p.a().size(); ++i) os << (i ? "," : "") << p.a()[i];
  return os.str();
}

VerificationReport worst_of(std::string id, std::string description, double tolerance,
                            const std::vector<double>& devs, std::uint64_t seed) {
  VerificationReport rep;
  rep.id = std::move(id);
  rep.description = std::move(description);
  rep.tolerance = tolerance;
  rep.seed = seed;
  rep.left = devs;
  rep.right.assign(devs.size(), tolerance);
  double w = 0.0;
  bool finite = true;
  for (double d : devs) {
    if (!std::isfinite(d)) finite = false;
    else w = std::max(w, d);
  }
  if (!finite) rep.flags.push_back("non-finite deviation");
  rep.constant = rep.max_ratio = finite ? w : HUGE_VAL;
  rep.min_ratio = 0.0;
  rep.pass = !devs.empty() && finite && w <= tolerance;
  return rep;
}

VerificationReport error_report(const std::string& suite, const std::string& what) {
  VerificationReport rep;
  rep.id = suite + "-error";
  rep.description = "suite aborted";
  rep.flags.push_back(what);
  rep.constant = rep.min_ratio = rep.max_ratio = HUGE_VAL;
  rep.pass = false;
  return rep;
}

std::vector<GroupPoint> sweep_points(const RunConfig& cfg) {
  const int dim = cfg.group.dim();
  std::vector<GroupPoint> pts;
  for (std::size_t i = 0; i < cfg.inequality_suite.points; ++i) {
    StreamRng rng(cfg.seed, kSweepPointStream, i);
    GroupPoint g = GroupPoint::zeros(dim);
    for (auto& c : g.coords()) c = cfg.inequality_suite.point_scale * rng.normal();
    pts.push_back(std::move(g));
  }
  return pts;
}

// Members small enough for the quadrature grid at time h, in family order.
std::vector<std::size_t> resolvable(std::span<const TestFunction> family, double h, const GridSpec& grid,
                                    std::size_t want) {
  std::vector<std::size_t> out;
  const double rmax = 0.9 * std::sqrt(h) * grid.angular / 4.0;
  for (std::size_t i = 0; i < family.size() && out.size() < want; ++i) {
    if (family[i].scale() <= rmax) out.push_back(i);
  }
  if (out.empty()) throw InsufficientDataError("no family member is resolvable by the quadrature grid");
  return out;
}

}  // namespace

// --- frozen bounds ------------------------------------------------------------------

FrozenBounds FrozenBounds::load(const std::string& path) {
  FrozenBounds fb;
  std::ifstream in(path);
  if (!in) return fb;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("frozen bounds " + path + ": " + e.what());
  }
  if (j.contains("band")) fb.band_ = j.at("band").get<double>();
  if (j.contains("entries")) fb.entries_ = j.at("entries");
  return fb;
}

void FrozenBounds::save(const std::string& path) const {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["note"] = "empirical regression values from the first verified run; not proven constants";
  j["band"] = band_;
  j["entries"] = entries_;
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << dump_json(j) << '\n';
}

const nlohmann::json* FrozenBounds::find(const std::string& suite, const std::string& key) const {
  const std::string k = suite + "@" + key;
  auto it = entries_.find(k);
  return it == entries_.end() ? nullptr : &*it;
}

void FrozenBounds::set(const std::string& suite, const std::string& key, const nlohmann::json& entries) {
  entries_[suite + "@" + key] = entries;
}

// --- results ------------------------------------------------------------------------

std::vector<std::string> SuiteResult::failing() const {
  std::vector<std::string> out;
  for (const auto& r : reports)
    if (!r.pass) out.push_back(r.id);
  return out;
}

nlohmann::json SuiteResult::to_json(const RunConfig& cfg) const {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["suite"] = suite;
  j["params"] = group_to_json(cfg.group);
  j["seed"] = cfg.seed;
  j["frozen_key"] = key;
  j["config"] = nhg::to_json(cfg);
  json reps = json::array();
  for (const auto& r : reports) reps.push_back(r.to_json());
  j["reports"] = reps;
  j["frozen_checked"] = frozen;
  j["unfrozen"] = unfrozen;
  j["failing"] = failing();
  j["verdict"] = pass ? "pass" : "fail";
  return j;
}

nlohmann::json SuiteResult::regression_values() const {
  json out = json::object();
  for (const auto& r : reports) {
    if (!r.extra.contains("regression")) continue;
    json e = json::object();
    for (const auto& kind : r.extra.at("regression")) {
      const std::string k = kind.get<std::string>();
      e[k] = k == "min" ? r.min_ratio : r.max_ratio;
    }
    out[r.id] = e;
  }
  return out;
}

std::string suite_key(const RunConfig& cfg, const std::string& suite) {
  const json full = to_json(cfg);
  json parts;
  parts["seed"] = cfg.seed;
  parts["group"] = full["group"];
  if (suite == "group") {
    parts["group_suite"] = full["group_suite"];
  } else if (suite == "distance") {
    parts["distance"] = full["distance"];
  } else if (suite == "kernel" || suite == "polar" || suite == "lemma6") {
    parts["quadrature"] = full["quadrature"];
    parts[suite] = full[suite];
  } else {
    parts["diffusion"] = full["diffusion"];
    parts["grid"] = full["grid"];
    parts["inequality"] = full["inequality"];
    const auto fam = load_family(resolve_data_path(cfg, cfg.inequality_suite.family));
    json fj = json::array();
    for (const auto& f : fam) fj.push_back(f.to_json());
    parts["family"] = fj;
  }
  return fnv1a(parts.dump());
}

// --- runner -------------------------------------------------------------------------

struct SuiteRunner::Cache {
  std::unique_ptr<HeatSample> sample;
  std::vector<TestFunction> family;
  bool family_loaded = false;
  std::vector<GroupPoint> points;
  std::vector<SweepRow> rows;
  bool swept = false;
};

SuiteRunner::SuiteRunner(RunConfig cfg, FrozenBounds frozen)
    : cfg_(std::move(cfg)), frozen_(std::move(frozen)), cache_(std::make_unique<Cache>()) {}

SuiteRunner::~SuiteRunner() = default;

namespace {

struct Ctx {
  const RunConfig& cfg;
  std::vector<VerificationReport>& out;

  void add(VerificationReport r) {
    r.seed = cfg.seed;
    out.push_back(std::move(r));
  }
  void add_regression(VerificationReport r, std::initializer_list<const char*> kinds) {
    json k = json::array();
    for (const char* s : kinds) k.push_back(s);
    r.extra["regression"] = k;
    add(std::move(r));
  }
};

void run_group(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<GroupParams> sets{cfg.group};
  for (const auto& p : cfg.group_suite.param_sets)
    if (std::find(sets.begin(), sets.end(), p) == sets.end()) sets.push_back(p);
  for (const auto& p : sets) {
    const std::string tag = "[" + group_label(p) + "]";
    auto a = check_group_axioms(p, cfg.group_suite.cases, cfg.seed);
    auto b = check_field_invariance(p, cfg.group_suite.cases, cfg.seed);
    auto c = check_field_finite_difference(p, cfg.group_suite.cases, cfg.seed);
    auto d = check_measure_invariance(p, cfg.group_suite.measure_cases, cfg.group_suite.measure_samples, cfg.seed);
    for (auto* r : {&a, &b, &c, &d}) {
      r->id += tag;
      ctx.add(std::move(*r));
    }
  }
}

void run_distance(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& G = cfg.group;
  const auto cloud = sample_cloud(G, cfg.distance_cloud);
  const std::size_t m = cloud.size();
  std::vector<double> anchor(m), forms(m), homog(m), resid(m);
  std::vector<int> skipped_forms(m, 0);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < m; ++i) {
    const GroupPoint& g = cloud[i];
    GroupPoint gz = g, gt = GroupPoint::zeros(G.dim());
    gz.coords().back() = 0.0;
    gt.coords().back() = g.t();
    double dev = 0.0;
    const double zn = std::sqrt(z_norm2(g.coords()));
    if (zn > 0.0) dev = std::max(dev, std::fabs(distance(G, gz) - zn) / zn);
    if (g.t() != 0.0) {
      const double ref = std::sqrt(kPi * std::fabs(g.t()));
      dev = std::max(dev, std::fabs(distance(G, gt) - ref) / ref);
    }
    anchor[i] = dev;

    const bool at_origin = zn == 0.0 && g.t() == 0.0;
    forms[i] = 0.0;
    resid[i] = 0.0;
    homog[i] = 0.0;
    if (at_origin) continue;
    const ThetaSolution th = solve_theta(G, g);
    if (th.branch == ThetaBranch::zl_zero_boundary) {
      skipped_forms[i] = 1;
    } else {
      const auto [f1, f2] = distance_squared_forms(G, g);
      forms[i] = std::fabs(f1 - f2) / std::max(f1, f2);
      resid[i] = std::fabs(th.residual) / (1.0 + std::fabs(g.t()));
    }
    StreamRng rng(cfg.seed, kScalingStream ^ 0xd15, i);
    const double r = std::exp(std::log(10.0) * (2.0 * rng.uniform() - 1.0));
    const double d1 = distance(G, g);
    homog[i] = std::fabs(distance(G, dilate(r, g)) - r * d1) / (r * d1);
  }
  ctx.add(worst_of("distance-anchors", "|d(z,0) - |z|| / |z| and |d(0,t) - sqrt(pi|t|)| / sqrt(pi|t|)", 1e-10,
                   anchor, cfg.seed));
  auto f = worst_of("distance-forms", "relative gap between the two closed forms of d^2", 1e-10, forms, cfg.seed);
  std::size_t skipped = 0;
  for (int s : skipped_forms) skipped += static_cast<std::size_t>(s);
  f.excluded = skipped;
  f.extra["boundary_branch_points"] = skipped;
  ctx.add(std::move(f));
  ctx.add(worst_of("distance-homogeneity", "|d(delta_r g) - r d(g)| / (r d(g))", 1e-10, homog, cfg.seed));
  ctx.add(worst_of("theta-residual", "|theta-equation residual| / (1 + |t|)", 1e-12, resid, cfg.seed));
  ctx.add_regression(check_distance_equivalence(G, cfg.distance_cloud), {"min", "max"});
}

void run_kernel(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& G = cfg.group;
  const auto& ks = cfg.kernel_suite;
  const auto& q = cfg.quadrature;

  {
    const GroupParams h1({1}, {1.0});
    const KernelValue p = kernel(h1, 1.0, origin(h1), q);
    VerificationReport rep;
    rep.id = "kernel-anchor";
    rep.description = "p_1(0,0) on the classical Heisenberg group against 1/64";
    rep.tolerance = 1e-6;
    rep.left = {p.value};
    rep.right = {1.0 / 64.0};
    rep.constant = rep.max_ratio = rep.min_ratio = std::fabs(p.value - 1.0 / 64.0);
    rep.extra["value"] = p.value;
    rep.extra["error_estimate"] = p.error;
    rep.pass = rep.constant <= rep.tolerance;
    ctx.add(std::move(rep));
  }

  SampleSpec cs;
  cs.z_max = ks.z_max;
  cs.t_max = ks.t_max;
  cs.seed = cfg.seed;
  cs.degenerate_fraction = 0.1;
  {
    cs.count = ks.scaling_cases;
    const auto cloud = sample_cloud(G, cs);
    std::vector<double> dev(cloud.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      StreamRng rng(cfg.seed, kScalingStream, i);
      const double h = std::exp(std::log(10.0) * (2.0 * rng.uniform() - 1.0));
      const auto z = z_norm2(cloud[i].coords());
      if (z == 0.0 && cloud[i].t() == 0.0) {
        dev[i] = 0.0;
        continue;
      }
      dev[i] = check_scaling(G, h, cloud[i], q).constant;
    }
    ctx.add(worst_of("kernel-scaling", "|h^{n+1} p_h(z,t) / p_1(z/sqrt h, t/h) - 1| over random (h, g)", 1e-8, dev,
                     cfg.seed));
  }
  {
    cs.count = ks.symmetry_points;
    cs.seed = cfg.seed + 1;
    const auto cloud = sample_cloud(G, cs);
    std::vector<double> dev;
    json per_h = json::object();
    for (double h : ks.symmetry_hs) {
      const auto r = check_kernel_symmetry(G, h, cloud, q);
      dev.insert(dev.end(), r.left.begin(), r.left.end());
      per_h[std::to_string(h)] = r.extra;
    }
    auto rep = worst_of("kernel-symmetry", "inversion, reflections, x d_y p = y d_x p, conjugate field identity",
                        1e-8, dev, cfg.seed);
    rep.extra["per_h"] = per_h;
    ctx.add(std::move(rep));
  }
  {
    cs.count = ks.lemma1_points;
    cs.seed = cfg.seed + 2;
    cs.z_max = 3.0 * ks.z_max;
    cs.t_max = 3.0 * ks.t_max;
    ctx.add_regression(check_lemma1_estimate(G, sample_cloud(G, cs), q), {"min", "max"});
  }
  {
    cs.count = ks.lemma2_points;
    cs.seed = cfg.seed + 3;
    cs.z_max = ks.z_max;
    cs.t_max = ks.t_max;
    auto [rt, rg] = check_lemma2(G, sample_cloud(G, cs), ks.lemma2_hs, q);
    ctx.add_regression(std::move(rt), {"max"});
    ctx.add_regression(std::move(rg), {"max"});
  }
}

Eigen::MatrixXd random_arrowhead(int dim, StreamRng& rng) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
  for (int b = 0; b + 1 < dim; b += 2) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) M(b + i, b + j) = rng.normal();
  }
  for (int i = 0; i < dim; ++i) {
    M(dim - 1, i) = rng.normal();
    M(i, dim - 1) = rng.normal();
  }
  return M;
}

void run_polar(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& G = cfg.group;
  const auto& ps = cfg.polar_suite;
  const int dim = G.dim();
  const auto pts = sample_polar_points(G, ps.points, cfg.seed, ps.u_max);
  const std::size_t m = pts.size();
  std::vector<double> round(m), jac(m), dist(m);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < m; ++i) {
    const PolarPoint& p = pts[i];
    const GroupPoint g = psi(G, p);
    const PolarPoint back = psi_inverse(G, g);
    double du = 0.0, un = 0.0;
    for (std::size_t c = 0; c < p.u.size(); ++c) {
      du = std::max(du, std::fabs(back.u[c] - p.u[c]));
      un = std::max(un, std::fabs(p.u[c]));
    }
    const GroupPoint g2 = psi(G, back);
    double dg = 0.0, gn = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      dg = std::max(dg, std::fabs(g2[c] - g[c]));
      gn = std::max(gn, std::fabs(g[c]));
    }
    round[i] = std::max({du / un, std::fabs(back.eta - p.eta) / std::fabs(p.eta), dg / gn});

    const double closed = jacobian_closed_form(G, p);
    const double lu = jacobian_matrix(G, p).partialPivLu().determinant();
    jac[i] = std::fabs(std::fabs(lu) - closed) / closed;

    const double U = polar_U(G, p);
    const double ref = U * std::fabs(p.eta);
    dist[i] = std::fabs(distance(G, g) - ref) / ref;
  }
  ctx.add(worst_of("polar-roundtrip", "Psi^{-1} Psi and Psi Psi^{-1}, relative sup deviation", 1e-10, round,
                   cfg.seed));
  ctx.add(worst_of("jacobian-closed-form", "|det D Psi (LU) - J closed form| / J", 1e-9, jac, cfg.seed));

  std::vector<double> rec(ps.matrices);
  for (std::size_t i = 0; i < ps.matrices; ++i) {
    StreamRng rng(cfg.seed, kMatrixStream, i);
    const Eigen::MatrixXd M = random_arrowhead(dim, rng);
    const double lu = M.partialPivLu().determinant();
    rec[i] = std::fabs(det_via_lemma5(M) - lu) / std::max(std::fabs(lu), 1e-300);
  }
  ctx.add(worst_of("arrowhead-recursion", "block-peeling determinant against LU, relative", 1e-9, rec, cfg.seed));
  ctx.add(worst_of("polar-distance", "|d(Psi(u, eta)) - U |eta|| / (U |eta|)", 1e-8, dist, cfg.seed));

  {
    std::vector<double> c(static_cast<std::size_t>(dim), 0.0);
    // Support kept clear of t = 0 and z_l = 0, whose preimages are unbounded.
    for (int i = 0; i + 1 < dim; ++i) c[static_cast<std::size_t>(i)] = 0.4 * std::cos(1.0 + i);
    c[static_cast<std::size_t>(2 * G.block_begin(G.blocks() - 1))] += 1.0;
    c.back() = 1.0;
    std::vector<int> e(static_cast<std::size_t>(dim), 0);
    e[0] = 2;
    std::vector<Monomial> poly{{1.0, std::vector<int>(static_cast<std::size_t>(dim), 0)}, {0.5, e}};
    const TestFunction F(c, 0.5, poly, true, "cov");
    ctx.add(check_change_of_variables(G, F, ps.cov_samples, cfg.seed));
  }
  {
    std::vector<Monomial> poly;
    for (int i = 0; i < dim; ++i) {
      std::vector<int> e(static_cast<std::size_t>(dim), 0);
      e[static_cast<std::size_t>(i)] = 1 + i % 2;
      poly.push_back({1.0 / (1.0 + i), e});
    }
    const TestFunction f = TestFunction::polynomial(dim, poly, "path");
    const auto starts = sample_polar_points(G, ps.paths, cfg.seed + 1, ps.u_max);
    std::vector<VerificationReport> per(starts.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < starts.size(); ++i) per[i] = horizontal_path_check(G, starts[i], f);
    VerificationReport rep;
    rep.id = "horizontal-path";
    rep.description = "horizontal velocity expansion, Cauchy-Schwarz bound, speed U and length = distance";
    rep.tolerance = 1e-8;
    bool ok = !per.empty();
    double worst = 0.0;
    json fields = json::object();
    for (const auto& r : per) {
      ok = ok && r.pass;
      worst = std::max(worst, r.constant);
      for (const auto& [k, v] : r.extra.items()) {
        if (v.is_number()) fields[k] = std::max(fields.value(k, 0.0), v.get<double>());
      }
      rep.left.push_back(r.constant);
      rep.right.push_back(r.tolerance);
    }
    rep.constant = rep.max_ratio = worst;
    rep.extra = fields;
    rep.extra["paths"] = per.size();
    rep.pass = ok;
    ctx.add(std::move(rep));
  }
}

void run_lemma6(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  PolarSampleSpec ps;
  ps.count = cfg.lemma6_suite.count;
  ps.seed = cfg.seed;
  ps.max_distance = cfg.lemma6_suite.max_distance;
  QuadratureSpec q = cfg.quadrature;
  q.rel_tol = cfg.lemma6_suite.kernel_rel_tol;
  ctx.add_regression(check_lemma6(cfg.group, sample_polar_cloud(cfg.group, ps), q), {"max"});
}

}  // namespace

SuiteResult SuiteRunner::run(const std::string& suite) {
  SuiteResult res;
  res.suite = suite;
  const auto t0 = std::chrono::steady_clock::now();
  Ctx ctx{cfg_, res.reports};
  auto& C = *cache_;
  auto sample = [&]() -> const HeatSample& {
    if (!C.sample) C.sample = std::make_unique<HeatSample>(cfg_.group, cfg_.diffusion);
    return *C.sample;
  };
  auto family = [&]() -> const std::vector<TestFunction>& {
    if (!C.family_loaded) {
      C.family = load_family(resolve_data_path(cfg_, cfg_.inequality_suite.family));
      C.family_loaded = true;
      for (const auto& f : C.family)
        if (f.dim() != cfg_.group.dim()) throw UsageError("family dimension does not match the group");
    }
    return C.family;
  };
  auto points = [&]() -> const std::vector<GroupPoint>& {
    if (C.points.empty()) C.points = sweep_points(cfg_);
    return C.points;
  };
  auto rows = [&]() -> const std::vector<SweepRow>& {
    if (!C.swept) {
      C.rows = sweep_family(sample(), family(), points(), cfg_.inequality_suite.hs);
      C.swept = true;
    }
    return C.rows;
  };

  try {
    res.key = suite_key(cfg_, suite);
    if (suite == "group") {
      run_group(ctx);
    } else if (suite == "distance") {
      run_distance(ctx);
    } else if (suite == "kernel") {
      run_kernel(ctx);
    } else if (suite == "polar") {
      run_polar(ctx);
    } else if (suite == "lemma6") {
      run_lemma6(ctx);
    } else if (suite == "li") {
      auto li = check_li_inequality(rows());
      const double K = li.constant;
      ctx.add_regression(std::move(li), {"max"});
      ctx.add(check_holder_corollary(rows(), K));
    } else if (suite == "lse-poe") {
      auto [lse, poe] = check_log_sobolev_poincare(rows());
      ctx.add_regression(std::move(lse), {"max"});
      ctx.add_regression(std::move(poe), {"max"});
    } else if (suite == "cheeger") {
      BallSampleSpec bs;
      bs.count = cfg_.inequality_suite.ball_count;
      bs.seed = cfg_.seed;
      auto reps = check_cheeger(sample(), family(), bs);
      for (auto& r : reps) ctx.add_regression(std::move(r), {"max"});
    } else if (suite == "identities") {
      const auto& in = cfg_.inequality_suite;
      const auto& G = cfg_.group;
      const auto& fam = family();
      const auto& pts = points();
      const std::size_t npts = std::min<std::size_t>(pts.size(), 4);
      const std::span<const GroupPoint> few(pts.data(), npts);
      ctx.add(check_markov(G, sample(), few, in.markov_hs, cfg_.grid));
      const auto idx_half = resolvable(fam, 0.5, cfg_.grid, in.identity_cases);
      const auto idx_one = resolvable(fam, 1.0, cfg_.grid, in.identity_cases);
      for (std::size_t c = 0; c < idx_half.size(); ++c) {
        const auto& f = fam[idx_half[c]];
        const GroupPoint& g = pts[c % pts.size()];
        auto a = check_commutation(G, f, 0.5, g, sample(), cfg_.grid);
        auto b = check_translation_dilation_reduction(G, f, 0.5, g, cfg_.grid);
        a.id += "[" + f.id() + "]";
        b.id += "[" + f.id() + "]";
        ctx.add(std::move(a));
        ctx.add(std::move(b));
      }
      for (std::size_t idx : idx_one) {
        auto r = check_integration_by_parts(G, fam[idx], 1.0, cfg_.grid);
        r.id += "[" + fam[idx].id() + "]";
        ctx.add(std::move(r));
      }
      auto sp = check_semigroup_property(G, sample(), fam[idx_half.front()], 0.25, 0.5, few, cfg_.grid);
      sp.id += "[" + fam[idx_half.front()].id() + "]";
      ctx.add(std::move(sp));
      ctx.add(check_histogram(G, sample(), 1.0));
    } else {
      throw UsageError("unknown suite '" + suite + "'");
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    res.reports.push_back(error_report(suite, e.what()));
  }

  const json* frozen = res.key.empty() ? nullptr : frozen_.find(suite, res.key);
  for (auto& r : res.reports) {
    if (!r.extra.contains("regression")) continue;
    const json* entry = frozen && frozen->contains(r.id) ? &frozen->at(r.id) : nullptr;
    if (!entry) {
      r.flags.push_back("no frozen value for this config");
      r.extra["frozen"] = nullptr;
      res.unfrozen.push_back(r.id);
      continue;
    }
    json applied = json::object();
    bool ok = true;
    for (const auto& kind : r.extra.at("regression")) {
      const std::string k = kind.get<std::string>();
      if (!entry->contains(k)) {
        ok = false;
        continue;
      }
      const double F = entry->at(k).get<double>();
      const double v = k == "min" ? r.min_ratio : r.max_ratio;
      const double lo = F - frozen_.band() * std::fabs(F), hi = F + frozen_.band() * std::fabs(F);
      const bool in = v >= lo && v <= hi;
      applied[k] = {{"frozen", F}, {"lo", lo}, {"hi", hi}, {"value", v}, {"within", in}};
      ok = ok && in;
    }
    r.extra["frozen"] = applied;
    if (!ok) {
      r.flags.push_back("outside frozen band");
      r.pass = false;
    }
    res.frozen.push_back(r.id);
  }
  res.pass = !res.reports.empty();
  for (const auto& r : res.reports) res.pass = res.pass && r.pass;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// --- run ----------------------------------------------------------------------------

RunOutcome run(const RunConfig& cfg, bool freeze, std::ostream* log) {
  namespace fs = std::filesystem;
  validate(cfg);
  const auto suites = expand_suites(cfg.suites);
  if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
  const std::string frozen_path = resolve_data_path(cfg, cfg.frozen_bounds);
  FrozenBounds frozen = FrozenBounds::load(frozen_path);
  SuiteRunner runner(cfg, frozen);

  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw UsageError("cannot create output directory " + cfg.output_dir);

  RunOutcome outcome;
  json summary;
  summary["schema_version"] = kReportSchemaVersion;
  summary["seed"] = cfg.seed;
  summary["params"] = group_to_json(cfg.group);
  summary["suites"] = json::array();
  bool all = true;
  for (const auto& s : suites) {
    SuiteResult r = runner.run(s);
    const std::string file = s + ".json";
    {
      std::ofstream out(fs::path(cfg.output_dir) / file);
      if (!out) throw UsageError("cannot write report " + file);
      out << dump_json(r.to_json(cfg)) << '\n';
    }
    if (log) {
      *log << (r.pass ? "PASS " : "FAIL ") << s << " (" << std::fixed << std::setprecision(1) << r.seconds << " s)";
      for (const auto& f : r.failing()) *log << " failing: " << f;
      if (!r.unfrozen.empty()) *log << " [" << r.unfrozen.size() << " unfrozen]";
      *log << '\n';
    }
    summary["suites"].push_back({{"suite", s}, {"file", file}, {"verdict", r.pass ? "pass" : "fail"},
                                 {"failing", r.failing()}});
    if (freeze && r.pass) frozen.set(s, r.key, r.regression_values());
    all = all && r.pass;
    outcome.results.push_back(std::move(r));
  }
  summary["verdict"] = all ? "pass" : "fail";
  {
    std::ofstream out(fs::path(cfg.output_dir) / "summary.json");
    out << dump_json(summary) << '\n';
  }
  if (freeze) frozen.save(frozen_path);
  outcome.exit_code = all ? 0 : 1;
  return outcome;
}

// --- plot data ----------------------------------------------------------------------

std::string plot_columns_help() {
  return "CSV columns:\n"
         "  kernel-slice     r,t,h,p,log_p,rel_error   p_h at z = (r, 0, ..., 0) along t\n"
         "  distance-sphere  direction,tau,<x1,y1,...,t>,d   points of the unit CC sphere and their distance\n"
         "  ratio-cloud      lemma6: re_u1,im_u1,...,eta,U,region,p,J,ratio (B^c cloud, p = p_1)\n"
         "                   li:     f_index,g_index,h,grad_norm,grad_abs,ratio,excluded\n";
}

void emit_plot_data(const RunConfig& cfg, const std::string& quantity, std::ostream& out, const PlotOptions& opt) {
  const auto& G = cfg.group;
  const int dim = G.dim();
  out << std::setprecision(17);
  if (quantity == "kernel-slice") {
    if (opt.resolution < 2) throw UsageError("resolution must be at least 2");
    if (!(opt.h > 0.0)) throw UsageError("h must be positive");
    out << "r,t,h,p,log_p,rel_error\n";
    for (double r : opt.radii) {
      const std::size_t m = opt.resolution;
      std::vector<KernelValue> vals(m);
#pragma omp parallel for schedule(dynamic, 4)
      for (std::size_t i = 0; i < m; ++i) {
        GroupPoint g = GroupPoint::zeros(dim);
        g[0] = r;
        g.coords().back() = -opt.t_extent + 2.0 * opt.t_extent * static_cast<double>(i) / static_cast<double>(m - 1);
        vals[i] = log_kernel(G, opt.h, g, cfg.quadrature);
      }
      for (std::size_t i = 0; i < m; ++i) {
        const double t = -opt.t_extent + 2.0 * opt.t_extent * static_cast<double>(i) / static_cast<double>(m - 1);
        out << r << ',' << t << ',' << opt.h << ',' << std::exp(vals[i].log_value) << ',' << vals[i].log_value << ','
            << vals[i].rel_error << '\n';
      }
    }
  } else if (quantity == "distance-sphere") {
    out << "direction,tau";
    for (int m = 0; m < G.n(); ++m) out << ",x" << m + 1 << ",y" << m + 1;
    out << ",t,d\n";
    for (std::size_t k = 0; k < opt.directions; ++k) {
      std::vector<double> w(static_cast<std::size_t>(dim - 1));
      if (G.n() == 1) {
        const double phi = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(opt.directions);
        w = {std::cos(phi), std::sin(phi)};
      } else {
        StreamRng rng(cfg.seed, 0x5fe4, k);
        double s = 0.0;
        for (auto& x : w) {
          x = rng.normal();
          s += x * x;
        }
        for (auto& x : w) x /= std::sqrt(s);
      }
      for (std::size_t i = 0; i < opt.resolution; ++i) {
        const double tau =
            std::tan(kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(opt.resolution) - 0.5 * kPi);
        GroupPoint q = GroupPoint::zeros(dim);
        for (std::size_t c = 0; c < w.size(); ++c) q[c] = w[c];
        q.coords().back() = tau;
        const GroupPoint p = dilate(1.0 / distance(G, q), q);
        out << k << ',' << tau;
        for (double c : p.coords()) out << ',' << c;
        out << ',' << distance(G, p) << '\n';
      }
    }
  } else if (quantity == "ratio-cloud") {
    if (opt.ratio_source == "lemma6") {
      PolarSampleSpec ps;
      ps.count = cfg.lemma6_suite.count;
      ps.seed = cfg.seed;
      ps.max_distance = cfg.lemma6_suite.max_distance;
      QuadratureSpec q = cfg.quadrature;
      q.rel_tol = cfg.lemma6_suite.kernel_rel_tol;
      const auto cloud = sample_polar_cloud(G, ps);
      std::vector<Lemma6Value> vals(cloud.size());
      std::vector<double> logp(cloud.size()), jac(cloud.size());
      std::vector<int> bad(cloud.size(), 0);
#pragma omp parallel for schedule(dynamic, 1)
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        try {
          vals[i] = lemma6_ratio(G, cloud[i], q);
          logp[i] = log_kernel(G, 1.0, psi(G, cloud[i]), q).log_value;
          jac[i] = jacobian_closed_form(G, cloud[i]);
        } catch (const std::exception&) {
          bad[i] = 1;
        }
      }
      for (int m = 0; m < G.n(); ++m) out << "re_u" << m + 1 << ",im_u" << m + 1 << ',';
      out << "eta,U,region,p,J,ratio\n";
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (double x : cloud[i].u) out << x << ',';
        out << cloud[i].eta << ',' << polar_U(G, cloud[i]) << ',' << to_string(classify_region(G, cloud[i])) << ',';
        if (bad[i]) out << "nan,nan,nan\n";
        else out << std::exp(logp[i]) << ',' << jac[i] << ',' << vals[i].ratio << '\n';
      }
    } else if (opt.ratio_source == "li") {
      const HeatSample sample(G, cfg.diffusion);
      const auto fam = load_family(resolve_data_path(cfg, cfg.inequality_suite.family));
      const auto rows = sweep_family(sample, fam, sweep_points(cfg), cfg.inequality_suite.hs);
      out << "f_index,g_index,h,grad_norm,grad_abs,ratio,excluded\n";
      for (const auto& r : rows) {
        const bool excl = below_floor(r.grad_abs);
        out << r.f_index << ',' << r.g_index << ',' << r.h << ',' << r.grad_norm << ',' << r.grad_abs.value << ','
            << (r.grad_abs.value > 0.0 ? r.grad_norm / r.grad_abs.value : 0.0) << ',' << (excl ? 1 : 0) << '\n';
      }
    } else {
      throw UsageError("ratio-cloud source must be lemma6 or li");
    }
  } else {
    throw UsageError("unsupported plot quantity '" + quantity + "'");
  }
}

}  // namespace nhg
