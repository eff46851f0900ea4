#pragma once

// Run directories, verification corpora, bound reports and sweeps.
//
// Run directory layout:
//   scenario.toml        exact config bytes; config_hash is its SHA-256
//   manifest.json        ids, hash, seed, snapshot index, artifacts, versions, diagnostics
//   snapshots/p_NNNNN.bin
//   diagnostics.json     only when the solver stopped early
//   bounds/report.json   plus bounds/<id>.csv with --plot-csv

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "forch/bounds.hpp"
#include "forch/config.hpp"
#include "forch/solver.hpp"

namespace forch {

inline constexpr int kSchemaVersion = 1;
const char* library_version();
nlohmann::json module_versions();

/// Serializes with two-space indent and a trailing newline.
std::string dump_json(const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);

struct SimulateSummary {
  bool complete = false;
  std::string error;
  bool invariants_ok = true;
};

/// Runs the scenario and writes the run directory. A NumericError from the solver is
/// recorded in diagnostics.json and rethrown after the directory is written.
SimulateSummary simulate_to_dir(const Config& cfg, const std::string& dir,
                                std::optional<std::uint64_t> seed = std::nullopt);

struct LoadedRun {
  std::string dir;
  Config cfg;
  Scenario sc;
  RunResult run;
  nlohmann::json manifest;
  std::uint64_t seed = 7;
};

/// Rebuilds scenario and fields from a run directory. Throws IoError when the manifest
/// or any snapshot is missing or the stored hash does not match scenario.toml.
LoadedRun load_run(const std::string& dir);

struct BoundsOptions {
  const Config* exponents = nullptr;  // overrides the run's [exponents] section
  double window = std::numeric_limits<double>::quiet_NaN();
  bool plot_csv = false;
};

nlohmann::json bound_report_json(const BoundReport& rep, const LoadedRun& run);

/// Evaluates every bound for a run, writes bounds/report.json (and CSVs) and
/// registers the artifacts in the manifest.
nlohmann::json bounds_for_run(const std::string& dir, const BoundsOptions& opt);

struct VerifyOutcome {
  nlohmann::json report;
  bool pass = true;
};

/// Targets are constitutive, inequalities, recurrence or all. `cfg` supplies the
/// [verify] section; an empty config gives the defaults.
VerifyOutcome verify(const std::vector<std::string>& targets, std::uint64_t seed, const Config& cfg);

struct SweepOutcome {
  nlohmann::json summary;
  std::vector<std::string> failures;
};

/// Axis is amplitude, grid, dt or contrast. One child run directory per value, run on
/// `jobs` worker threads; aggregation happens after all children finish.
SweepOutcome sweep(const Config& tmpl, const std::string& axis, const std::vector<double>& values,
                   const std::string& out_dir, int jobs, const BoundsOptions& opt);

/// Text summary of a run or sweep directory; writes summary.json (and CSV with plot_csv).
std::string report(const std::string& dir, bool plot_csv);

}  // namespace forch
