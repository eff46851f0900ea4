#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "forch/config.hpp"
#include "forch/solver.hpp"

namespace testing {

inline forch::Scenario scenario_from(const std::string& toml) {
  return forch::build_scenario(forch::Config::parse(toml));
}

// Fresh empty directory under the build tree.
inline std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("forch_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace testing
