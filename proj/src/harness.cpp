#include "forch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "forch/error.hpp"
#include "forch/expr.hpp"
#include "forch/inequalities.hpp"
#include "forch/norms.hpp"
#include "forch/raster.hpp"
#include "forch/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace forch {

const char* library_version() { return "1.0.0"; }

json module_versions() {
  return {{"constitutive", "1.0"}, {"weighted_norms", "1.0"}, {"inequalities", "1.0"},
          {"solver", "1.0"},       {"bounds", "1.0"},         {"harness", "1.0"}};
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("write failed for " + path);
}

namespace {

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

std::string snapshot_name(std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshots/p_%05zu.bin", k);
  return buf;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

json invariants_json(const InvariantSummary& inv) {
  return {{"max_principle", {{"checked", inv.checked_max_principle}, {"ok", inv.max_principle_ok},
                             {"worst_margin", inv.worst_max_principle}}},
          {"conservation", {{"checked", inv.checked_conservation}, {"ok", inv.conservation_ok},
                            {"worst_defect", inv.worst_conservation}}},
          {"energy", {{"checked", inv.checked_energy}, {"ok", inv.energy_ok}, {"worst_margin", inv.worst_energy}}}};
}

const char* kCornerNote =
    "Rectangular domain: boundary faces take Dirichlet ghosts 2 psi - p, corner ghosts are bilinear "
    "extrapolations; the smooth-boundary assumption is not met at the four corners.";

}  // namespace

SimulateSummary simulate_to_dir(const Config& cfg, const std::string& dir, std::optional<std::uint64_t> seed) {
  const Scenario sc = build_scenario(cfg);
  const std::uint64_t s = seed ? *seed : static_cast<std::uint64_t>(cfg.integer("seed", 7));
  fs::create_directories(dir);
  fs::remove_all(fs::path(dir) / "snapshots");
  fs::remove_all(fs::path(dir) / "bounds");
  fs::remove(fs::path(dir) / "diagnostics.json");
  fs::create_directories(fs::path(dir) / "snapshots");
  write_text((fs::path(dir) / "scenario.toml").string(), cfg.text());

  const RunResult r = run(sc);
  json snaps = json::array();
  json artifacts = json::array({"scenario.toml"});
  for (std::size_t k = 0; k < r.p.steps(); ++k) {
    const std::string name = snapshot_name(k);
    write_raster((fs::path(dir) / name).string(), r.p.frame(k));
    snaps.push_back({{"index", k}, {"time", r.p.times()[k]}, {"file", name}});
    artifacts.push_back(name);
  }
  json diag = {{"steps_done", r.steps_done},
               {"steps_planned", sc.steps()},
               {"max_picard_iterations", r.max_picard},
               {"total_cg_iterations", r.total_cg},
               {"invariants", invariants_json(r.invariants)},
               {"strict_degree_condition", check_sdc(sc.law, 2)},
               {"darcy_mode", sc.law.is_darcy()},
               {"corner_treatment", kCornerNote}};
  if (!r.complete) {
    json d = {{"schema_version", kSchemaVersion},
              {"kind", "numeric_failure"},
              {"error", r.error},
              {"residual_history", r.error_residuals},
              {"steps_done", r.steps_done},
              {"time_reached", r.steps_done * sc.dt}};
    write_text((fs::path(dir) / "diagnostics.json").string(), dump_json(d));
    artifacts.push_back("diagnostics.json");
  }
  json manifest = {{"schema_version", kSchemaVersion},
                   {"kind", "run"},
                   {"scenario_id", sc.id},
                   {"config_hash", cfg.hash()},
                   {"source_dir", cfg.base_dir()},
                   {"seed", s},
                   {"status", r.complete ? "complete" : "failed"},
                   {"grid", {{"nx", sc.grid.nx}, {"ny", sc.grid.ny}, {"dx", sc.grid.dx}, {"dy", sc.grid.dy}}},
                   {"snapshots", snaps},
                   {"artifacts", artifacts},
                   {"module_versions", module_versions()},
                   {"library_version", library_version()},
                   {"diagnostics", diag}};
  write_text((fs::path(dir) / "manifest.json").string(), dump_json(manifest));
  if (!r.complete) throw NumericError(r.error, r.error_residuals);
  SimulateSummary out;
  out.complete = true;
  out.invariants_ok = r.invariants.ok();
  return out;
}

LoadedRun load_run(const std::string& dir) {
  LoadedRun lr;
  lr.dir = dir;
  const fs::path root(dir);
  if (!fs::exists(root / "manifest.json")) throw IoError("missing manifest.json in " + dir);
  lr.manifest = read_json((root / "manifest.json").string());
  const std::string text = read_text((root / "scenario.toml").string());
  if (sha256_hex(text) != lr.manifest.value("config_hash", std::string()))
    throw IoError("scenario.toml does not match the manifest hash in " + dir);
  lr.cfg = Config::parse(text, lr.manifest.value("source_dir", root.string()));
  lr.sc = build_scenario(lr.cfg);
  lr.seed = lr.manifest.value("seed", std::uint64_t{7});
  if (lr.manifest.value("status", std::string()) != "complete") throw IoError("run in " + dir + " is not complete");
  const json& snaps = lr.manifest.at("snapshots");
  if (snaps.size() < 2) throw IoError("missing snapshots in " + dir);
  std::vector<double> times;
  std::vector<Field> frames, grads;
  const Stepper st(lr.sc);
  for (const auto& s : snaps) {
    const fs::path p = root / s.at("file").get<std::string>();
    if (!fs::exists(p)) throw IoError("missing snapshot " + p.string());
    Field f = read_raster(p.string());
    if (!(f.grid() == lr.sc.grid)) throw IoError("snapshot grid mismatch in " + p.string());
    const double t = s.at("time").get<double>();
    times.push_back(t);
    grads.push_back(st.gradient_norm(f, t));
    frames.push_back(std::move(f));
  }
  lr.run.p = SpaceTimeField(lr.sc.grid, times, std::move(frames));
  lr.run.grad_p = SpaceTimeField(lr.sc.grid, times, std::move(grads));
  lr.run.complete = true;
  lr.run.steps_done = lr.sc.steps();
  derive_fields(lr.sc, lr.run);
  return lr;
}

json bound_report_json(const BoundReport& rep, const LoadedRun& run) {
  const ExponentPack& P = rep.pack;
  json entries = json::array();
  for (const auto& e : rep.entries)
    entries.push_back({{"id", e.id},
                       {"description", e.description},
                       {"samples", e.t.size()},
                       {"c_fit", e.c_fit},
                       {"finite", e.finite},
                       {"bounded", e.bounded},
                       {"t", e.t},
                       {"lhs", e.lhs},
                       {"rhs", e.rhs},
                       {"ratio", e.ratio}});
  const DataFunctionals& d = rep.data;
  return {{"schema_version", kSchemaVersion},
          {"kind", "bounds"},
          {"scenario_id", run.sc.id},
          {"config_hash", run.cfg.hash()},
          {"seed", run.seed},
          {"assumptions", rep.notes},
          {"exponents",
           {{"a", P.a}, {"r", P.r}, {"r_conj", P.rp}, {"r0", P.r0}, {"r1", P.r1}, {"r2", P.r2},
            {"kappa1", P.kappa1}, {"kappa2", P.kappa2}, {"kappa3", P.kappa3}, {"kappa4", P.kappa4},
            {"kappa5", P.kappa5}, {"nu1", P.nu1}, {"nu2", P.nu2}, {"delta1", P.delta1}, {"delta2", P.delta2}}},
          {"sobolev_c", rep.sobolev_c},
          {"c2", rep.c2},
          {"initial_energy", rep.A0},
          {"data",
           {{"B1", d.B1}, {"Bstar", d.Bstar}, {"T_detect", d.T_detect}, {"t", d.t}, {"G", d.G}, {"G1", d.G1},
            {"majorant", d.M}, {"window_max_G", d.A}, {"window_max_neg_dG", d.B}}},
          {"entries", entries}};
}

json bounds_for_run(const std::string& dir, const BoundsOptions& opt) {
  LoadedRun lr = load_run(dir);
  Config merged = lr.cfg;
  if (opt.exponents) merged.merge_section(*opt.exponents, "exponents");
  BoundsConfig bc = bounds_config(merged);
  if (!merged.has("exponents.seed")) bc.seed = lr.seed;
  if (!std::isnan(opt.window)) {
    if (!(opt.window > 0.0)) throw ValidationError("window", "must be positive");
    bc.window = opt.window;
  }
  BoundsContext ctx(lr.sc, lr.run, bc);
  const BoundReport rep = ctx.evaluate();
  json j = bound_report_json(rep, lr);
  j["window"] = bc.window;
  j["theta"] = bc.theta;

  const fs::path bdir = fs::path(dir) / "bounds";
  fs::create_directories(bdir);
  json produced = json::array({"bounds/report.json"});
  if (opt.plot_csv) {
    for (const auto& e : rep.entries) {
      std::string csv = "t,lhs,rhs,ratio\n";
      for (std::size_t k = 0; k < e.t.size(); ++k)
        csv += fmt(e.t[k]) + "," + fmt(e.lhs[k]) + "," + fmt(e.rhs[k]) + "," + fmt(e.ratio[k]) + "\n";
      const std::string name = "bounds/" + e.id + ".csv";
      write_text((fs::path(dir) / name).string(), csv);
      produced.push_back(name);
    }
  }
  j["artifacts"] = produced;
  write_text((bdir / "report.json").string(), dump_json(j));

  json manifest = lr.manifest;
  json& arts = manifest["artifacts"];
  json kept = json::array();
  for (const auto& a : arts)
    if (a.get<std::string>().rfind("bounds/", 0) != 0) kept.push_back(a);
  for (const auto& a : produced) kept.push_back(a);
  arts = kept;
  write_text((fs::path(dir) / "manifest.json").string(), dump_json(manifest));
  return j;
}

// ---------------------------------------------------------------------------
// Verification corpora

namespace {

Field expr_field(const Grid2D& g, const char* text) {
  const Expr e = Expr::parse(text);
  return Field::sample(g, [&](double x, double y) { return e.eval(x, y, 0.0); });
}

ForchheimerLaw reference_law(const Grid2D& g) {
  return ForchheimerLaw({0.0, 1.0}, {expr_field(g, "1 + 0.5*sin(2*pi*x)*cos(pi*y)"),
                                     expr_field(g, "0.5 + y + 0.25*cos(3*x)")});
}

Field reference_porosity(const Grid2D& g) { return expr_field(g, "0.3 + 0.1*sin(pi*x)*sin(pi*y)"); }

json check_json(const ConstitutiveCheck& c) {
  return {{"samples", c.samples},
          {"lower_sandwich", c.lower_sandwich},
          {"upper_sandwich", c.upper_sandwich},
          {"lower_quadratic", c.lower_quadratic},
          {"upper_quadratic", c.upper_quadratic},
          {"derivative", c.derivative},
          {"weight_product", c.weight_product},
          {"max_residual", c.max_residual},
          {"monotone", c.monotone},
          {"worst", {{"check", c.worst_check}, {"cell", c.worst_cell}, {"xi", c.worst_xi}}},
          {"pass", c.pass}};
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  return v;
}

json verify_constitutive(std::uint64_t seed, const Config& cfg, bool& pass) {
  const int nx = cfg.integer("verify.constitutive_nx", 32);
  const int nxi = cfg.integer("verify.xi_count", 63);
  const double xmin = cfg.number("verify.xi_min", 1e-6), xmax = cfg.number("verify.xi_max", 1e6);
  if (nx < 2) throw ValidationError("verify.constitutive_nx", "must be >= 2");
  if (nxi < 1) throw ValidationError("verify.xi_count", "must be >= 1");
  if (!(xmin > 0.0 && xmax > xmin)) throw ValidationError("verify.xi_max", "need 0 < xi_min < xi_max");
  const Grid2D g = Grid2D::box(nx, nx);
  std::vector<double> xis = log_spaced(xmin, xmax, nxi);
  xis.insert(xis.begin(), 0.0);
  std::vector<std::size_t> cells(g.cells());
  for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = c;

  json out;
  const ForchheimerLaw law = reference_law(g);
  const WeightSet w = build_weights(law);
  const ConstitutiveCheck ref = verify_constitutive_bounds(law, w, cells, xis);
  out["reference_law"] = check_json(ref);
  out["reference_law"]["a"] = w.a;
  pass = pass && ref.pass;

  // Closed-form root of a0 s + a1 s^2 = xi, written without cancellation.
  double worst_root = 0.0, worst_H = 0.0;
  for (std::size_t c : cells) {
    const LocalLaw L = law.at(c);
    const double a0 = L.coef[0], a1 = L.coef[1];
    for (double xi : xis) {
      const double exact = 2.0 * xi / (a0 + std::sqrt(a0 * a0 + 4.0 * a1 * xi));
      const double s = L.solve_s(xi);
      const double err = exact == 0.0 ? std::abs(s) : std::abs(s - exact) / exact;
      worst_root = std::max(worst_root, err);
    }
    if (c % 61 == 0)
      for (double xi : xis) {
        const double hc = L.H_closed(xi);
        const double hq = L.H(xi);
        worst_H = std::max(worst_H, hc == 0.0 ? std::abs(hq) : std::abs(hq - hc) / hc);
      }
  }
  out["two_term_root"] = {{"worst_relative_error", worst_root}, {"tolerance", 1e-10}, {"pass", worst_root <= 1e-10}};
  out["energy_density"] = {{"worst_relative_error", worst_H}, {"tolerance", 1e-6}, {"pass", worst_H <= 1e-6}};
  pass = pass && worst_root <= 1e-10 && worst_H <= 1e-6;

  // Random multi-term laws with smooth heterogeneous coefficients.
  Rng rng(seed);
  const int nlaws = cfg.integer("verify.random_laws", 4);
  const Grid2D gs = Grid2D::box(16, 16);
  std::vector<std::size_t> scells(gs.cells());
  for (std::size_t c = 0; c < scells.size(); ++c) scells[c] = c;
  json laws = json::array();
  for (int k = 0; k < nlaws; ++k) {
    const int terms = rng.integer(2, 5);
    std::vector<double> exps{0.0};
    for (int i = 1; i < terms; ++i) exps.push_back(exps.back() + rng.uniform(0.1, 1.0));
    std::vector<Field> coefs;
    for (int i = 0; i < terms; ++i) {
      const bool zero = i > 0 && i + 1 < terms && rng.uniform() < 0.25;
      const double level = rng.log_uniform(0.1, 10.0);
      const double kx = rng.integer(1, 3), ky = rng.integer(1, 3), ph = rng.uniform(0.0, 6.283185307179586);
      const double amp = rng.uniform(0.0, 0.9);
      coefs.push_back(Field::sample(gs, [&](double x, double y) {
        return zero ? 0.0 : level * (1.0 + amp * std::sin(2.0 * std::numbers::pi * (kx * x + ky * y) + ph));
      }));
    }
    const ForchheimerLaw L(exps, coefs);
    const ConstitutiveCheck c = verify_constitutive_bounds(L, build_weights(L), scells, xis);
    json j = check_json(c);
    j["exponents"] = exps;
    laws.push_back(j);
    pass = pass && c.pass;
  }
  out["random_laws"] = laws;
  out["xi"] = {{"count", xis.size()}, {"min_positive", xmin}, {"max", xmax}, {"includes_zero", true}};
  out["slack"] = 1e-9;
  return out;
}

json margin_stats(const std::vector<double>& v) {
  if (v.empty()) return {{"count", 0}};
  double lo = v[0], sum = 0.0;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    sum += v[k];
    if (v[k] < lo) {
      lo = v[k];
      arg = k;
    }
  }
  return {{"count", v.size()}, {"min", lo}, {"mean", sum / v.size()}, {"worst_index", arg}};
}

json verify_exponent_packs(std::uint64_t seed, const Config& cfg, bool& pass) {
  const ExponentPack spot = ExponentPack::make(0.5, 4.0, std::numeric_limits<double>::quiet_NaN(), 4.0);
  const std::vector<std::pair<const char*, std::pair<double, double>>> expect = {
      {"r0", {spot.r0, 2.75}},          {"kappa1", {spot.kappa1, 11.0 / 3.0}}, {"nu2", {spot.nu2, 20.0 / 9.0}},
      {"delta1", {spot.delta1, 1.0 / 3.0}}, {"delta2", {spot.delta2, 1.0 / 12.0}}, {"kappa4", {spot.kappa4, 5.0 / 6.0}}};
  json spots = json::object();
  bool spot_ok = true;
  for (const auto& [name, vals] : expect) {
    const double err = std::abs(vals.first - vals.second);
    spots[name] = {{"value", vals.first}, {"expected", vals.second}, {"error", err}};
    spot_ok = spot_ok && err <= 1e-12;
  }
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int n = cfg.integer("verify.exponent_packs", 10000);
  int bad_signs = 0, bad_chains = 0;
  json first_bad;
  for (int k = 0; k < n; ++k) {
    const double a = rng.uniform(0.01, 0.99);
    const double r = 2.0 + rng.log_uniform(0.05, 50.0);
    const double r0 = 2.0 + (2.0 - a) * (1.0 - 2.0 / r);
    const double r1 = 1.0 + (0.5 * r0 - 1.0) * rng.uniform(0.05, 0.95);
    const double r2 = 2.0 * (r - 1.0) / (r - 2.0) * (1.0 + rng.log_uniform(0.01, 10.0));
    const ExponentPack p = ExponentPack::make(a, r, r1, r2);
    const bool s = p.signs_hold(), c = p.ordering_chains_hold();
    if (!s) ++bad_signs;
    if (!c) ++bad_chains;
    if ((!s || !c) && first_bad.is_null()) first_bad = {{"a", a}, {"r", r}, {"r1", r1}, {"r2", r2}};
  }
  const bool ok = spot_ok && bad_signs == 0 && bad_chains == 0;
  pass = pass && ok;
  return {{"spot_values", spots},
          {"spot_pass", spot_ok},
          {"random_packs", n},
          {"sign_failures", bad_signs},
          {"chain_failures", bad_chains},
          {"first_failure", first_bad},
          {"pass", ok}};
}

json verify_inequalities(std::uint64_t seed, const Config& cfg, bool& pass) {
  const int nx = cfg.integer("verify.inequality_nx", 64);
  const int nt = cfg.integer("verify.time_samples", 32);
  const int count = cfg.integer("verify.corpus_size", 20);
  if (nx < 4) throw ValidationError("verify.inequality_nx", "must be >= 4");
  if (nt < 2) throw ValidationError("verify.time_samples", "must be >= 2");
  if (count < 1) throw ValidationError("verify.corpus_size", "must be >= 1");
  const Grid2D g = Grid2D::box(nx, nx);
  const ForchheimerLaw law = reference_law(g);
  const WeightSet w = build_weights(law);
  const Field phi = reference_porosity(g);
  const double q = 2.0 - w.a;
  const double cap = 64.0;
  const auto corpus = sobolev_corpus(g, static_cast<std::size_t>(count), seed);

  PSConfig ps = default_ps_config(q, 2, phi, w.W1, 1.0, cap);
  const double c_emp = estimate_c_empirical(corpus, ps.q0, cap);
  ps.c = 2.0 * c_emp;
  const double c0 = estimate_c0_formula(ps);

  // Separable space-time functions T(t) X(x) with X from the corpus.
  std::vector<double> times(nt);
  for (int k = 0; k < nt; ++k) times[k] = static_cast<double>(k) / (nt - 1);
  Rng rng(seed + 1);
  std::vector<double> m_prod, m_sum, m_cor, ratios;
  json per = json::array();
  const double qs0 = sobolev_conjugate(ps.q0, 2, cap);
  for (const auto& f : corpus) {
    const double amp = rng.uniform(0.0, 0.9), om = rng.uniform(0.5, 3.0), ph = rng.uniform(0.0, 6.283185307179586);
    const double decay = rng.uniform(0.0, 2.0);
    const Field gn = f.gradient_norm();
    std::vector<Field> uf, gf;
    for (double t : times) {
      const double T = std::exp(-decay * t) * (1.0 + amp * std::sin(om * t + ph));
      Field u = f.value, gr = gn;
      for (std::size_t c = 0; c < u.size(); ++c) {
        u[c] *= T;
        gr[c] *= std::abs(T);
      }
      uf.push_back(std::move(u));
      gf.push_back(std::move(gr));
    }
    const SpaceTimeField U(g, times, uf), Gd(g, times, gf);
    const InterpolationMargin im = verify_parabolic_interpolation(U, Gd, phi, w.W1, ps.r, q, c0);
    const CorollaryMargin cm = verify_corollary_K(U, Gd, Gd, law, phi, w.W1, c0, ps.r);
    const double ratio = norm_space(f.value, qs0) / norm_space(gn, ps.q0);
    m_prod.push_back(im.margin_product);
    m_sum.push_back(im.margin_sum);
    m_cor.push_back(cm.margin);
    ratios.push_back(ratio);
    per.push_back({{"kind", f.kind},
                   {"sobolev_ratio", ratio},
                   {"p", im.p},
                   {"lhs", im.lhs},
                   {"rhs_product", im.rhs_product},
                   {"rhs_sum", im.rhs_sum},
                   {"margin_product", im.margin_product},
                   {"margin_sum", im.margin_sum},
                   {"corollary_lhs", cm.lhs},
                   {"corollary_rhs", cm.rhs},
                   {"corollary_margin", cm.margin}});
  }
  auto min_of = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };
  const bool ok = min_of(m_prod) >= -1e-9 && min_of(m_sum) >= -1e-9 && min_of(m_cor) >= -1e-9;
  pass = pass && ok;

  // Decay lemma on smooth decreasing series whose slopes stay within beta + 1.
  const int nd = cfg.integer("verify.decay_series", 20);
  Rng drng(seed + 2);
  int decay_fail = 0;
  double decay_worst = 1e300;
  for (int k = 0; k < nd; ++k) {
    const double A = drng.uniform(0.1, 10.0), lam = drng.uniform(0.1, 2.0);
    std::vector<double> t(101), f(101);
    for (int i = 0; i <= 100; ++i) {
      t[i] = 0.1 * i;
      f[i] = A * std::exp(-lam * t[i]);
    }
    const DecayCheck d = check_decay_lemma(t, f, A * lam);
    decay_worst = std::min(decay_worst, d.worst_margin);
    if (!d.pass) ++decay_fail;
  }
  pass = pass && decay_fail == 0;

  return {{"grid", nx},
          {"time_samples", nt},
          {"corpus_size", count},
          {"a", w.a},
          {"q", q},
          {"r", ps.r},
          {"q0", ps.q0},
          {"q0_note", "q0 is the midpoint of the admissible interval"},
          {"sobolev_c_empirical", c_emp},
          {"sobolev_c_used", ps.c},
          {"safety_factor", 2.0},
          {"c0", c0},
          {"interpolation_product", margin_stats(m_prod)},
          {"interpolation_sum", margin_stats(m_sum)},
          {"corollary", margin_stats(m_cor)},
          {"functions", per},
          {"decay_lemma", {{"series", nd}, {"failures", decay_fail}, {"worst_margin", nd ? decay_worst : 0.0}}},
          {"exponents", verify_exponent_packs(seed, cfg, pass)},
          {"tolerance", -1e-9},
          {"pass", ok && decay_fail == 0}};
}

json verify_recurrence(std::uint64_t seed, const Config& cfg, bool& pass) {
  // Worked case: Y_{i+1} = 2^i Y_i^2 from 1/2 gives 2^-(i+1).
  RecurrenceSpec worked;
  worked.A = {1.0};
  worked.mu = {1.0};
  worked.B = 2.0;
  worked.Y0 = 0.5;
  const RecurrenceTrace wt = run_recurrence(worked, 20);
  double werr = 0.0;
  for (std::size_t i = 0; i < wt.Y.size(); ++i) werr = std::max(werr, std::abs(wt.Y[i] - std::ldexp(1.0, -static_cast<int>(i) - 1)));
  const bool worked_ok = !wt.diverged && wt.Y.size() == 21 && werr <= 1e-12;

  const int n = cfg.integer("verify.recurrence_count", 200);
  const int steps = cfg.integer("verify.recurrence_steps", 200);
  Rng rng(seed ^ 0x5851f42d4c957f2dULL);
  int failures = 0, worst_steps = 0;
  double worst_final = 0.0;
  bool monotone = true;
  json first_fail;
  for (int k = 0; k < n; ++k) {
    RecurrenceSpec s;
    const int m = rng.integer(1, 4);
    for (int i = 0; i < m; ++i) {
      s.A.push_back(rng.log_uniform(0.1, 10.0));
      s.mu.push_back(rng.uniform(0.1, 1.5));
    }
    s.B = rng.uniform(2.0, 8.0);
    s.Y0 = threshold(s);
    const RecurrenceTrace tr = run_recurrence(s, steps, 1e-6);
    int reached = -1;
    for (std::size_t i = 0; i < tr.Y.size(); ++i)
      if (tr.Y[i] < 1e-6) {
        reached = static_cast<int>(i);
        break;
      }
    for (std::size_t i = 1; i < tr.Y.size(); ++i)
      if (tr.Y[i] > tr.Y[i - 1]) monotone = false;
    if (tr.diverged || reached < 0) {
      ++failures;
      if (first_fail.is_null()) first_fail = {{"A", s.A}, {"mu", s.mu}, {"B", s.B}, {"Y0", s.Y0}};
    } else {
      worst_steps = std::max(worst_steps, reached);
      worst_final = std::max(worst_final, tr.Y[reached]);
    }
  }
  const bool ok = worked_ok && failures == 0 && monotone;
  pass = pass && ok;
  return {{"worked_case", {{"max_error", werr}, {"steps", 20}, {"pass", worked_ok}}},
          {"random_specs", n},
          {"target", 1e-6},
          {"max_steps", steps},
          {"failures", failures},
          {"first_failure", first_fail},
          {"worst_steps_to_target", worst_steps},
          {"monotone", monotone},
          {"pass", ok}};
}

}  // namespace

VerifyOutcome verify(const std::vector<std::string>& targets, std::uint64_t seed, const Config& cfg) {
  if (targets.empty()) throw ValidationError("targets", "no verification target given");
  bool c = false, i = false, r = false;
  for (const auto& t : targets) {
    if (t == "constitutive") c = true;
    else if (t == "inequalities") i = true;
    else if (t == "recurrence") r = true;
    else if (t == "all") c = i = r = true;
    else throw ValidationError("targets", "unknown target " + t);
  }
  VerifyOutcome out;
  json results = json::object();
  if (c) {
    bool p = true;
    results["constitutive"] = verify_constitutive(seed, cfg, p);
    results["constitutive"]["pass"] = p;
    out.pass = out.pass && p;
  }
  if (i) {
    bool p = true;
    results["inequalities"] = verify_inequalities(seed, cfg, p);
    results["inequalities"]["pass"] = p;
    out.pass = out.pass && p;
  }
  if (r) {
    bool p = true;
    results["recurrence"] = verify_recurrence(seed, cfg, p);
    out.pass = out.pass && p;
  }
  out.report = {{"schema_version", kSchemaVersion},
                {"kind", "verify"},
                {"seed", seed},
                {"targets", targets},
                {"results", results},
                {"pass", out.pass}};
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

Config child_config(const Config& tmpl, const std::string& axis, double v) {
  Config c = tmpl;
  if (axis == "amplitude") {
    c.set("boundary.amplitude", ConfigValue::of(tmpl.number("boundary.amplitude", 1.0) * v));
  } else if (axis == "grid") {
    if (v != std::floor(v) || v < 2) throw ValidationError("sweep.values", "grid values must be integers >= 2");
    const int nx = tmpl.integer("grid.nx", 32);
    const int ny = tmpl.integer("grid.ny", nx);
    c.set("grid.nx", ConfigValue::of(v));
    c.set("grid.ny", ConfigValue::of(std::round(v * ny / nx)));
  } else if (axis == "dt") {
    if (!(v > 0.0)) throw ValidationError("sweep.values", "dt values must be positive");
    const double dt0 = tmpl.number("time.dt", 1e-2);
    const int every = tmpl.integer("time.snapshot_every", 1);
    c.set("time.dt", ConfigValue::of(v));
    c.set("time.snapshot_every", ConfigValue::of(std::max(1.0, std::round(every * dt0 / v))));
  } else if (axis == "contrast") {
    c.set("law.contrast", ConfigValue::of(v));
  } else {
    throw ValidationError("axis", "unknown sweep axis " + axis + " (amplitude, grid, dt, contrast)");
  }
  return c;
}

// 2x2 block average of a field on a grid refined by two in each direction.
Field restrict_half(const Field& fine, const Grid2D& coarse) {
  Field out(coarse, 0.0);
  for (int j = 0; j < coarse.ny; ++j)
    for (int i = 0; i < coarse.nx; ++i)
      out(i, j) = 0.25 * (fine(2 * i, 2 * j) + fine(2 * i + 1, 2 * j) + fine(2 * i, 2 * j + 1) +
                          fine(2 * i + 1, 2 * j + 1));
  return out;
}

}  // namespace

SweepOutcome sweep(const Config& tmpl, const std::string& axis, const std::vector<double>& values,
                   const std::string& out_dir, int jobs, const BoundsOptions& opt) {
  if (values.empty()) throw ValidationError("sweep.values", "no values given");
  std::vector<Config> configs;
  for (double v : values) configs.push_back(child_config(tmpl, axis, v));
  for (const auto& c : configs) build_scenario(c);
  fs::create_directories(out_dir);
  const std::size_t n = values.size();
  std::vector<std::string> dirs(n), errors(n);
  std::vector<json> reports(n);
  for (std::size_t k = 0; k < n; ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%02zu", axis.c_str(), k);
    dirs[k] = buf;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        const std::string d = (fs::path(out_dir) / dirs[k]).string();
        simulate_to_dir(configs[k], d);
        reports[k] = bounds_for_run(d, opt);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepOutcome out;
  json children = json::array();
  for (std::size_t k = 0; k < n; ++k) {
    json c = {{"value", values[k]}, {"dir", dirs[k]}, {"status", errors[k].empty() ? "ok" : "failed"}};
    if (!errors[k].empty()) {
      c["error"] = errors[k];
      out.failures.push_back(dirs[k] + ": " + errors[k]);
    }
    children.push_back(c);
  }
  // Fitted constants per bound across the sweep.
  json fitted = json::object();
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < n; ++k)
    if (errors[k].empty())
      for (const auto& e : reports[k]["entries"])
        if (std::find(ids.begin(), ids.end(), e["id"].get<std::string>()) == ids.end())
          ids.push_back(e["id"].get<std::string>());
  std::string csv = "id";
  for (double v : values) csv += "," + fmt(v);
  csv += ",variation,bounded\n";
  for (const auto& id : ids) {
    json cf = json::array();
    double lo = 1e300, hi = 0.0;
    bool bounded = true, any = false;
    csv += id;
    for (std::size_t k = 0; k < n; ++k) {
      double c = std::numeric_limits<double>::quiet_NaN();
      if (errors[k].empty())
        for (const auto& e : reports[k]["entries"])
          if (e["id"] == id) {
            c = e["c_fit"].get<double>();
            bounded = bounded && e["bounded"].get<bool>() && e["finite"].get<bool>();
            any = true;
          }
      cf.push_back(c);
      csv += "," + fmt(c);
      if (std::isfinite(c)) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
    const double variation = any && lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    fitted[id] = {{"c_fit", cf}, {"variation", variation}, {"bounded", bounded}, {"stable", variation < 10.0}};
    csv += "," + fmt(variation) + "," + (bounded ? "true" : "false") + "\n";
  }
  json summary = {{"schema_version", kSchemaVersion}, {"kind", "sweep"},      {"axis", axis},
                  {"values", values},                 {"children", children}, {"fitted", fitted},
                  {"failures", out.failures}};

  // Successive-difference convergence table for dx-halving sweeps.
  if (axis == "grid" && out.failures.empty() && n >= 3) {
    std::vector<Field> finals;
    for (std::size_t k = 0; k < n; ++k) {
      const LoadedRun lr = load_run((fs::path(out_dir) / dirs[k]).string());
      finals.push_back(lr.run.p.frames().back());
    }
    json diffs = json::array(), ratios = json::array();
    bool halving = true;
    std::vector<double> d;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const Grid2D& gc = finals[k].grid();
      const Grid2D& gf = finals[k + 1].grid();
      if (gf.nx != 2 * gc.nx || gf.ny != 2 * gc.ny) {
        halving = false;
        break;
      }
      const Field rf = restrict_half(finals[k + 1], gc);
      Field diff(gc, 0.0);
      for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = finals[k][c] - rf[c];
      d.push_back(norm_space(diff, 2.0));
      diffs.push_back(d.back());
    }
    if (halving) {
      for (std::size_t k = 0; k + 1 < d.size(); ++k) ratios.push_back(d[k] / d[k + 1]);
      summary["convergence"] = {{"differences", diffs}, {"ratios", ratios}};
    }
  }
  write_text((fs::path(out_dir) / "sweep.json").string(), dump_json(summary));
  write_text((fs::path(out_dir) / "fitted_c.csv").string(), csv);
  out.summary = summary;
  return out;
}

std::string report(const std::string& dir, bool plot_csv) {
  const fs::path root(dir);
  std::ostringstream txt;
  json summary = {{"schema_version", kSchemaVersion}, {"kind", "summary"}};
  std::string csv;
  if (fs::exists(root / "sweep.json")) {
    const json s = read_json((root / "sweep.json").string());
    summary["source"] = "sweep.json";
    summary["axis"] = s["axis"];
    summary["values"] = s["values"];
    txt << "sweep over " << s["axis"].get<std::string>() << " with " << s["values"].size() << " values\n";
    csv = "id,variation,bounded\n";
    json rows = json::object();
    for (const auto& [id, f] : s["fitted"].items()) {
      const double var = f["variation"].is_number() ? f["variation"].get<double>() : std::numeric_limits<double>::infinity();
      txt << "  " << id << "  variation " << fmt_short(var) << (f["bounded"].get<bool>() ? "  bounded" : "  UNBOUNDED") << "\n";
      rows[id] = {{"variation", f["variation"]}, {"bounded", f["bounded"]}};
      csv += id + "," + fmt(var) + "," + (f["bounded"].get<bool>() ? "true" : "false") + "\n";
    }
    summary["fitted"] = rows;
    if (s.contains("convergence")) {
      summary["convergence"] = s["convergence"];
      txt << "  convergence ratios " << s["convergence"]["ratios"].dump() << "\n";
    }
    if (!s["failures"].empty()) txt << "  failures: " << s["failures"].dump() << "\n";
  } else if (fs::exists(root / "manifest.json")) {
    const json m = read_json((root / "manifest.json").string());
    summary["source"] = "manifest.json";
    summary["scenario_id"] = m["scenario_id"];
    summary["status"] = m["status"];
    summary["snapshots"] = m["snapshots"].size();
    summary["invariants"] = m["diagnostics"]["invariants"];
    txt << "run " << m["scenario_id"].get<std::string>() << "  status " << m["status"].get<std::string>() << "  "
        << m["snapshots"].size() << " snapshots\n";
    for (const char* k : {"max_principle", "conservation", "energy"}) {
      const json& inv = m["diagnostics"]["invariants"][k];
      txt << "  " << k << ": " << (inv["checked"].get<bool>() ? (inv["ok"].get<bool>() ? "ok" : "VIOLATED") : "not checked")
          << "\n";
    }
    if (fs::exists(root / "bounds" / "report.json")) {
      const json b = read_json((root / "bounds" / "report.json").string());
      csv = "id,samples,c_fit,bounded\n";
      json rows = json::object();
      for (const auto& e : b["entries"]) {
        const std::string id = e["id"];
        txt << "  " << id << "  c_fit " << fmt_short(e["c_fit"].get<double>()) << (e["bounded"].get<bool>() ? "" : "  UNBOUNDED")
            << "\n";
        rows[id] = {{"c_fit", e["c_fit"]}, {"bounded", e["bounded"]}, {"samples", e["samples"]}};
        csv += id + "," + std::to_string(e["samples"].get<std::size_t>()) + "," + fmt(e["c_fit"].get<double>()) + "," +
               (e["bounded"].get<bool>() ? "true" : "false") + "\n";
      }
      summary["bounds"] = rows;
    }
  } else {
    throw IoError("no manifest.json or sweep.json in " + dir);
  }
  write_text((root / "summary.json").string(), dump_json(summary));
  if (plot_csv && !csv.empty()) write_text((root / "summary.csv").string(), csv);
  return txt.str();
}

}  // namespace forch
