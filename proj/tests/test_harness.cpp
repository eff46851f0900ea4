#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "forch.h"
#include "forch/config.hpp"
#include "forch/error.hpp"
#include "forch/harness.hpp"
#include "forch/raster.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace forch;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = FORCH_SCENARIO_DIR;
const std::string kBaselines = FORCH_BASELINE_DIR;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

int cli(const std::string& args) {
  const std::string cmd = std::string(FORCH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmall = R"toml(id = "small"
seed = 3
[grid]
nx = 8
[law]
exponents = [0, 1]
coefficients = [1, "0.5 + x"]
[boundary]
psi = "0.2*sin(t)*x"
initial = 0
[time]
T = 1.5
dt = 0.05
snapshot_every = 2
)toml";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parses sections, lists, comments and keeps exact bytes") {
    const std::string text = "# top\nid = \"abc\"  # trailing\n[grid]\nnx = 12\n[law]\nexponents = [0, 0.5, 1]\n"
                             "coefficients = [1, \"x\", 2]\n[verify]\nseed = 5\n";
    const Config c = Config::parse(text);
    CHECK(c.text() == text);
    CHECK(c.string("id", "") == "abc");
    CHECK(c.integer("grid.nx", 0) == 12);
    CHECK(c.find("law.exponents")->items.size() == 3);
    CHECK(c.find("law.coefficients")->items[1].text == "x");
    CHECK(c.number("grid.ny", 7.5) == 7.5);
    CHECK(c.hash() == sha256_hex(text));
  }

  TEST_CASE("sha256 reference digest") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("unknown keys, sections and duplicates are validation errors") {
    auto field_of = [](const std::string& text) {
      try {
        Config::parse(text);
      } catch (const ValidationError& e) {
        return e.field();
      }
      return std::string("none");
    };
    CHECK(field_of("[grid]\nnz = 3\n") == "grid.nz");
    try {
      Config::parse("[gird]\nnx = 3\n");
      FAIL("accepted an unknown section");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("gird") != std::string::npos);
    }
    CHECK(field_of("[grid]\nnx = 3\nnx = 4\n") == "grid.nx");
    CHECK(field_of("[grid]\nnx = \n") != "none");
    CHECK(field_of("[grid]\nnx = 4\n") == "none");
  }

  TEST_CASE("serialize round trip and set") {
    Config c = Config::parse(kSmall);
    const Config back = Config::parse(c.serialize());
    CHECK(back.serialize() == c.serialize());
    c.set("boundary.amplitude", ConfigValue::of(2.0));
    CHECK(c.number("boundary.amplitude", 0) == 2.0);
    CHECK(Config::parse(c.text()).number("boundary.amplitude", 0) == 2.0);
    CHECK(c.hash() == sha256_hex(c.text()));
  }

  TEST_CASE("scenario building and field validation") {
    auto field_of = [](const std::string& text) {
      try {
        build_scenario(Config::parse(text));
      } catch (const ValidationError& e) {
        return e.field();
      }
      return std::string("none");
    };
    CHECK(field_of("[law]\nexponents = [0, 2, 1]\ncoefficients = [1, 1, 1]\n") == "law.exponents");
    CHECK(field_of("[law]\nexponents = [0, 1]\ncoefficients = [1, -1]\n") == "law.coefficients[1]");
    CHECK(field_of("[law]\nexponents = [0, 1]\ncoefficients = [1, 1]\n[porosity]\nphi = \"x - 0.5\"\n") != "none");
    CHECK(field_of("[law]\nexponents = [0, 1]\ncoefficients = [\"1 + t\", 1]\n") != "none");
    CHECK(field_of("[law]\nexponents = [0, 1]\ncoefficients = [1, 1]\n[time]\ndt = -1\n") != "none");
    CHECK(field_of(kSmall) == "none");

    const Scenario sc = build_scenario(Config::parse(kSmall));
    CHECK(sc.grid.nx == 8);
    CHECK(sc.grid.ny == 8);
    CHECK(sc.law.aN()[sc.grid.index(3, 0)] == doctest::Approx(0.5 + sc.grid.xc(3)));
    CHECK(sc.p0.max_abs() == 0.0);
  }

  TEST_CASE("raster coefficients resolve relative to the config directory") {
    const std::string dir = testing::scratch_dir("raster_cfg");
    const Grid2D g = Grid2D::box(8, 8);
    write_raster(dir + "/a1.bin", Field::sample(g, [](double x, double y) { return 1 + x * y; }));
    {
      std::ofstream(dir + "/s.toml") << "[grid]\nnx = 8\n[law]\nexponents = [0, 1]\ncoefficients = [1, \"raster:a1.bin\"]\n";
    }
    const Scenario sc = build_scenario(Config::load(dir + "/s.toml"));
    CHECK(sc.law.aN()[g.index(2, 5)] == doctest::Approx(1 + g.xc(2) * g.yc(5)));
  }
}

TEST_SUITE("harness") {
  TEST_CASE("simulate writes a complete manifest") {
    const std::string dir = testing::scratch_dir("sim");
    const Config cfg = Config::load(kScenarios + "/zero_data.toml");
    const SimulateSummary s = simulate_to_dir(cfg, dir + "/run");
    CHECK(s.complete);
    CHECK(s.invariants_ok);
    const json m = read_json(dir + "/run/manifest.json");
    CHECK(m["schema_version"] == kSchemaVersion);
    CHECK(m["scenario_id"] == "zero_data");
    CHECK(m["seed"] == 7);
    CHECK(m["config_hash"] == sha256_hex(slurp(dir + "/run/scenario.toml")));
    CHECK(slurp(dir + "/run/scenario.toml") == slurp(kScenarios + "/zero_data.toml"));
    for (const auto& a : m["artifacts"]) CHECK(fs::exists(dir + "/run/" + a.get<std::string>()));
    for (const auto& snap : m["snapshots"]) {
      const Field f = read_raster(dir + "/run/" + snap["file"].get<std::string>());
      CHECK(f.max_abs() == 0.0);
    }
    CHECK(m.contains("module_versions"));
    CHECK(m["diagnostics"]["invariants"]["max_principle"]["ok"] == true);

    // Bounds add their artifacts to the manifest.
    bounds_for_run(dir + "/run", BoundsOptions{});
    const json m2 = read_json(dir + "/run/manifest.json");
    bool listed = false;
    for (const auto& a : m2["artifacts"]) {
      CHECK(fs::exists(dir + "/run/" + a.get<std::string>()));
      listed |= a == "bounds/report.json";
    }
    CHECK(listed);
    const json rep = read_json(dir + "/run/bounds/report.json");
    for (const auto& e : rep["entries"]) CHECK(e["c_fit"] == 0.0);
  }

  TEST_CASE("missing snapshots and edited configs are io errors") {
    const std::string dir = testing::scratch_dir("broken");
    simulate_to_dir(Config::parse(kSmall), dir + "/run");
    CHECK_NOTHROW(load_run(dir + "/run"));
    fs::remove(dir + "/run/snapshots/p_00003.bin");
    CHECK_THROWS_AS(load_run(dir + "/run"), IoError);
    simulate_to_dir(Config::parse(kSmall), dir + "/run2");
    { std::ofstream(dir + "/run2/scenario.toml", std::ios::app) << "\n# edited\n"; }
    CHECK_THROWS_AS(load_run(dir + "/run2"), IoError);
  }

  TEST_CASE("reloaded runs reproduce the in-memory fields") {
    const std::string dir = testing::scratch_dir("reload");
    const Config cfg = Config::parse(kSmall);
    simulate_to_dir(cfg, dir + "/run");
    const LoadedRun lr = load_run(dir + "/run");
    const RunResult direct = run(build_scenario(cfg));
    REQUIRE(lr.run.p.steps() == direct.p.steps());
    for (std::size_t k = 0; k < direct.p.steps(); ++k) {
      CHECK(lr.run.p.frame(k).values() == direct.p.frame(k).values());
      CHECK(lr.run.pbar_t.frame(k).values() == direct.pbar_t.frame(k).values());
      CHECK(lr.run.grad_p.frame(k).values() == direct.grad_p.frame(k).values());
    }
    CHECK(lr.seed == 3);
  }

  TEST_CASE("verify target validation") {
    CHECK_THROWS_AS(verify({}, 7, Config()), ValidationError);
    CHECK_THROWS_AS(verify({"bogus"}, 7, Config()), ValidationError);
    const VerifyOutcome v = verify({"recurrence"}, 7, Config());
    CHECK(v.pass);
    CHECK(v.report["results"]["recurrence"]["random_specs"] == 200);
  }

  TEST_CASE("verify is deterministic") {
    const Config cfg = Config::parse("[verify]\nconstitutive_nx = 8\ninequality_nx = 16\ntime_samples = 6\ncorpus_size = 4\n"
                                     "recurrence_count = 20\nexponent_packs = 200\n");
    const std::string a = dump_json(verify({"all"}, 11, cfg).report);
    const std::string b = dump_json(verify({"all"}, 11, cfg).report);
    CHECK(a == b);
    CHECK(a != dump_json(verify({"all"}, 12, cfg).report));
  }

  TEST_CASE("one-point sweep reduces to simulate plus bounds") {
    const std::string dir = testing::scratch_dir("sweep1");
    const Config cfg = Config::parse(kSmall);
    const SweepOutcome s = sweep(cfg, "amplitude", {1.0}, dir + "/sweep", 1, BoundsOptions{});
    CHECK(s.failures.empty());
    simulate_to_dir(cfg, dir + "/run");
    const json direct = bounds_for_run(dir + "/run", BoundsOptions{});
    const json child = read_json(dir + "/sweep/" + s.summary["children"][0]["dir"].get<std::string>() + "/bounds/report.json");
    REQUIRE(direct["entries"].size() == child["entries"].size());
    for (std::size_t k = 0; k < child["entries"].size(); ++k)
      CHECK(direct["entries"][k]["c_fit"] == child["entries"][k]["c_fit"]);
    CHECK(fs::exists(dir + "/sweep/fitted_c.csv"));
    CHECK(!report(dir + "/sweep", true).empty());
    CHECK(fs::exists(dir + "/sweep/summary.json"));
  }

  TEST_CASE("grid-halving sweep gives second-order differences") {
    const std::string dir = testing::scratch_dir("sweep_grid");
    const Config cfg = Config::parse(R"toml(id = "conv"
[law]
exponents = [0, 1]
coefficients = ["1 + 0.5*sin(2*pi*x)", "1 + 0.25*y"]
[porosity]
phi = "0.5 + 0.25*x*y"
[boundary]
psi = "(1 + t)*(x*x + 0.5*y + x*y)"
initial = "psi"
[time]
T = 0.2
dt = 0.05
)toml");
    const SweepOutcome s = sweep(cfg, "grid", {8, 16, 32, 64}, dir, 2, BoundsOptions{});
    REQUIRE(s.failures.empty());
    REQUIRE(s.summary.contains("convergence"));
    for (const auto& r : s.summary["convergence"]["ratios"]) {
      CHECK(r.get<double>() >= 3.0);
      CHECK(r.get<double>() <= 5.0);
    }
  }

  TEST_CASE("regression scenarios match archived baselines") {
    for (const char* id : {"regression_small", "darcy_eigen"}) {
      CAPTURE(id);
      const std::string dir = testing::scratch_dir(std::string("baseline_") + id);
      const SimulateSummary s = simulate_to_dir(Config::load(kScenarios + "/" + id + ".toml"), dir);
      CHECK(s.invariants_ok);
      const json rep = bounds_for_run(dir, BoundsOptions{});
      const json base = read_json(kBaselines + "/" + id + ".json");
      const double tol = base["tolerance"].get<double>();
      for (const auto& e : rep["entries"]) {
        const std::string eid = e["id"].get<std::string>();
        CAPTURE(eid);
        REQUIRE(base["entries"].contains(eid));
        const json& b = base["entries"][eid];
        CHECK(std::abs(e["c_fit"].get<double>() - b["c_fit"].get<double>()) <=
              tol * std::max(1.0, std::abs(b["c_fit"].get<double>())));
        REQUIRE(e["ratio"].size() == b["ratio"].size());
        for (std::size_t k = 0; k < b["ratio"].size(); ++k) {
          if (b["ratio"][k].is_null()) {
            CHECK(e["ratio"][k].is_null());
            continue;
          }
          const double want = b["ratio"][k].get<double>();
          CHECK(std::abs(e["ratio"][k].get<double>() - want) <= tol * std::max(1e-12, std::abs(want)));
        }
      }
    }
  }
}

TEST_SUITE("capi") {
  TEST_CASE("handles, strings and error codes") {
    CHECK(std::string(forch_version()) == "1.0.0");
    forch_scenario* sc = nullptr;
    REQUIRE(forch_scenario_parse(kSmall, ".", &sc) == FORCH_OK);
    CHECK(forch_scenario_validate(sc) == FORCH_OK);
    char hash[65];
    CHECK(forch_scenario_hash(sc, hash, sizeof hash) == FORCH_OK);
    CHECK(std::string(hash) == sha256_hex(kSmall));
    char small[10];
    CHECK(forch_scenario_hash(sc, small, sizeof small) == FORCH_ERR_USAGE);

    CHECK(forch_scenario_set(sc, "law.exponents", "[0, -1]") == FORCH_OK);
    CHECK(forch_scenario_validate(sc) == FORCH_ERR_VALIDATION);
    CHECK(std::string(forch_last_error_field()) == "law.exponents");
    CHECK(forch_scenario_set(sc, "law.exponents", "[0, 1]") == FORCH_OK);
    CHECK(forch_scenario_set(sc, "grid.bogus", "1") == FORCH_ERR_VALIDATION);

    char* text = nullptr;
    CHECK(forch_scenario_text(sc, &text) == FORCH_OK);
    CHECK(std::string(text).find("exponents = [0, 1]") != std::string::npos);
    forch_string_free(text);

    const std::string dir = testing::scratch_dir("capi");
    CHECK(forch_simulate(sc, (dir + "/run").c_str(), 9) == FORCH_OK);
    forch_scenario_free(sc);

    forch_run* run = nullptr;
    REQUIRE(forch_run_open((dir + "/run").c_str(), &run) == FORCH_OK);
    const size_t n = forch_run_snapshot_count(run);
    CHECK(n == 16);
    int nx = 0, ny = 0;
    double dx = 0, dy = 0;
    CHECK(forch_run_grid(run, &nx, &ny, &dx, &dy) == FORCH_OK);
    CHECK(nx == 8);
    double t = -1;
    CHECK(forch_run_time(run, n - 1, &t) == FORCH_OK);
    CHECK(t == doctest::Approx(1.5));
    std::vector<double> buf(64);
    for (int which = 0; which < 4; ++which) CHECK(forch_run_field(run, n - 1, which, buf.data(), buf.size()) == FORCH_OK);
    CHECK(forch_run_field(run, n, 0, buf.data(), buf.size()) == FORCH_ERR_USAGE);
    CHECK(forch_run_field(run, 0, 7, buf.data(), buf.size()) == FORCH_ERR_USAGE);
    CHECK(forch_run_field(run, 0, 0, buf.data(), 10) == FORCH_ERR_USAGE);
    forch_run_free(run);

    char* rep = nullptr;
    CHECK(forch_bounds((dir + "/run").c_str(), nullptr, 0.5, 1, &rep) == FORCH_OK);
    CHECK(json::parse(rep)["window"] == 0.5);
    forch_string_free(rep);
    CHECK(fs::exists(dir + "/run/bounds/p_linf_local.csv"));

    CHECK(forch_run_open((dir + "/none").c_str(), &run) == FORCH_ERR_IO);
    CHECK(forch_scenario_load((dir + "/none.toml").c_str(), &sc) == FORCH_ERR_IO);
    CHECK(forch_scenario_load(nullptr, &sc) == FORCH_ERR_USAGE);
    CHECK(forch_verify("", 7, nullptr, nullptr) == FORCH_ERR_VALIDATION);
  }

  TEST_CASE("scalar law helpers") {
    const double e[] = {0, 1}, c[] = {1, 1};
    double v = 0;
    CHECK(forch_law_solve_s(e, c, 2, 2.0, &v) == FORCH_OK);
    CHECK(v == doctest::Approx(1.0));
    CHECK(forch_law_K(e, c, 2, 12.0, &v) == FORCH_OK);
    CHECK(v == doctest::Approx(0.25));
    CHECK(forch_law_H(e, c, 2, 0.0, &v) == FORCH_OK);
    CHECK(v == 0.0);
    CHECK(forch_law_K(e, c, 2, -1.0, &v) == FORCH_ERR_VALIDATION);
    const double bad[] = {0, 0};
    CHECK(forch_law_K(bad, c, 2, 1.0, &v) == FORCH_ERR_VALIDATION);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    const std::string dir = testing::scratch_dir("cli");
    {
      std::ofstream(dir + "/bad.toml") << "[law]\nexponents = [0, 2, 1]\ncoefficients = [1, 1, 1]\n";
    }
    CHECK(cli("--help") == 0);
    CHECK(cli("") == 2);
    CHECK(cli("simulate --config " + dir + "/bad.toml --out " + dir + "/bad") == 2);
    const std::string msg = dir + "/msg.txt";
    CHECK(std::system((std::string(FORCH_CLI) + " simulate --config " + dir + "/bad.toml --out " + dir + "/bad 2>" + msg).c_str()) != 0);
    CHECK(slurp(msg).find("law.exponents") != std::string::npos);
    CHECK(cli("simulate --config " + dir + "/none.toml --out " + dir + "/x") == 2);
    CHECK(cli("verify") == 2);
    CHECK(cli("verify bogus") == 2);
    CHECK(cli("verify recurrence --out " + dir + "/rec.json") == 0);
    CHECK(read_json(dir + "/rec.json")["pass"] == true);

    CHECK(cli("simulate --config " + kScenarios + "/zero_data.toml --out " + dir + "/zero") == 0);
    CHECK(cli("bounds " + dir + "/zero --plot-csv") == 0);
    CHECK(cli("report " + dir + "/zero") == 0);
    fs::remove(dir + "/zero/snapshots/p_00002.bin");
    CHECK(cli("bounds " + dir + "/zero") == 2);
    CHECK(cli("bounds " + dir + "/nothing") == 2);
    CHECK(cli("sweep --config " + kScenarios + "/zero_data.toml --axis nope --values 1 --out " + dir + "/sw") == 2);
  }
}
