#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forch.h"

namespace {

int exit_code(forch_status s) {
  switch (s) {
    case FORCH_OK: return 0;
    case FORCH_ERR_INVARIANT: return 1;
    case FORCH_ERR_NUMERIC: return 3;
    case FORCH_ERR_VALIDATION:
    case FORCH_ERR_IO:
    case FORCH_ERR_USAGE: return 2;
    default: return 4;
  }
}

int report_error(const char* what, forch_status s) {
  std::fprintf(stderr, "forch %s: %s\n", what, forch_last_error());
  if (s == FORCH_ERR_NUMERIC) std::fprintf(stderr, "{\"error\": \"numeric\", \"message\": \"%s\"}\n", forch_last_error());
  return exit_code(s);
}

// Takes ownership of a library string and writes it to a file or stdout.
bool emit(char* text, const std::string& path) {
  if (!text) return true;
  bool ok = true;
  if (path.empty()) {
    std::fputs(text, stdout);
  } else {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    ok = static_cast<bool>(f);
  }
  forch_string_free(text);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forchheimer flow simulator, verification corpora and a-priori bound reports"};
  app.require_subcommand(1);

  std::string config, out, axis;
  long long seed = -1;
  int jobs = 1;
  double window = 0.0;
  bool plot_csv = false;
  std::vector<std::string> targets;
  std::vector<double> values;
  std::string dir;

  auto* sim = app.add_subcommand("simulate", "run a scenario and write a run directory");
  sim->add_option("--config", config, "scenario file")->required();
  sim->add_option("--out", out, "run directory")->required();
  sim->add_option("--seed", seed, "seed recorded in the manifest and used by bound estimates");

  auto* ver = app.add_subcommand("verify", "run verification corpora: constitutive, inequalities, recurrence, all");
  ver->add_option("targets", targets, "verification targets");
  ver->add_option("--seed", seed, "corpus seed (default 7)");
  ver->add_option("--config", config, "file with a [verify] section");
  ver->add_option("--out", out, "report path (default stdout)");

  auto* bnd = app.add_subcommand("bounds", "evaluate every bound for a run directory");
  bnd->add_option("run", dir, "run directory")->required();
  bnd->add_option("--config", config, "file whose [exponents] section overrides the run's");
  bnd->add_option("--window", window, "trailing window standing in for limsup");
  bnd->add_flag("--plot-csv", plot_csv, "write one CSV time series per bound");
  bnd->add_option("--out", out, "also copy the report here");

  auto* swp = app.add_subcommand("sweep", "one run per value of a scalar knob, with fitted-constant table");
  swp->add_option("--config", config, "template scenario")->required();
  swp->add_option("--axis", axis, "amplitude, grid, dt or contrast")->required();
  swp->add_option("--values", values, "axis values")->required()->delimiter(',');
  swp->add_option("--out", out, "sweep directory")->required();
  swp->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  swp->add_option("--window", window, "trailing window standing in for limsup");
  swp->add_flag("--plot-csv", plot_csv, "write bound CSV time series for every child");

  auto* rep = app.add_subcommand("report", "summarize a run or sweep directory");
  rep->add_option("dir", dir, "run or sweep directory")->required();
  rep->add_flag("--plot-csv", plot_csv, "also write summary.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sim->parsed()) {
    forch_scenario* sc = nullptr;
    forch_status s = forch_scenario_load(config.c_str(), &sc);
    if (s != FORCH_OK) return report_error("simulate", s);
    s = forch_simulate(sc, out.c_str(), seed);
    forch_scenario_free(sc);
    if (s != FORCH_OK) return report_error("simulate", s);
    std::printf("%s\n", out.c_str());
    return 0;
  }
  if (ver->parsed()) {
    if (targets.empty()) {
      std::fprintf(stderr, "forch verify: no target given (constitutive, inequalities, recurrence, all)\n");
      return 2;
    }
    std::string joined;
    for (const auto& t : targets) joined += (joined.empty() ? "" : ",") + t;
    char* report = nullptr;
    const forch_status s = forch_verify(joined.c_str(), seed < 0 ? 7 : static_cast<uint64_t>(seed),
                                        config.empty() ? nullptr : config.c_str(), &report);
    if (!emit(report, out)) {
      std::fprintf(stderr, "forch verify: cannot write %s\n", out.c_str());
      return 2;
    }
    if (s != FORCH_OK) return report_error("verify", s);
    return 0;
  }
  if (bnd->parsed()) {
    char* report = nullptr;
    const forch_status s =
        forch_bounds(dir.c_str(), config.empty() ? nullptr : config.c_str(), window, plot_csv ? 1 : 0, &report);
    if (s != FORCH_OK) return report_error("bounds", s);
    if (!out.empty()) emit(report, out);
    else forch_string_free(report);
    char* text = nullptr;
    if (forch_report(dir.c_str(), 0, &text) == FORCH_OK) emit(text, "");
    return 0;
  }
  if (swp->parsed()) {
    char* summary = nullptr;
    const forch_status s = forch_sweep(config.c_str(), axis.c_str(), values.data(), values.size(), out.c_str(), jobs,
                                       window, plot_csv ? 1 : 0, &summary);
    forch_string_free(summary);
    if (s != FORCH_OK && s != FORCH_ERR_INVARIANT) return report_error("sweep", s);
    char* text = nullptr;
    if (forch_report(out.c_str(), plot_csv ? 1 : 0, &text) == FORCH_OK) emit(text, "");
    if (s != FORCH_OK) return report_error("sweep", s);
    return 0;
  }
  if (rep->parsed()) {
    char* text = nullptr;
    const forch_status s = forch_report(dir.c_str(), plot_csv ? 1 : 0, &text);
    if (s != FORCH_OK) return report_error("report", s);
    emit(text, "");
    return 0;
  }
  return 2;
}
