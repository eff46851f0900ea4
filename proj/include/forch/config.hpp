#pragma once

// Scenario files: a small TOML subset.
//
//   # comment
//   id = "name"
//   [section]
//   key = 1.5            number
//   key = true           boolean
//   key = "text"         string (expressions, "raster:path")
//   key = [0, 1, "x"]    flat list of the above
//
// Recognized sections are grid, law, porosity, boundary, time, exponents, verify.
// Unknown keys are rejected so that typos surface as validation errors.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forch/bounds.hpp"
#include "forch/solver.hpp"

namespace forch {

struct ConfigValue {
  enum class Kind { Number, Bool, String, List };
  Kind kind = Kind::Number;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<ConfigValue> items;

  static ConfigValue of(double v);
  static ConfigValue of(bool v);
  static ConfigValue of(std::string v);
  /// Parses a single literal (number, boolean, quoted string or list).
  static ConfigValue parse(std::string_view literal, const std::string& key);
  std::string serialize() const;
};

class Config {
public:
  Config() = default;
  /// Throws ValidationError naming the offending line or key.
  static Config parse(std::string text, std::string base_dir = ".");
  /// Throws IoError when the file cannot be read.
  static Config load(const std::string& path);

  /// Exact bytes the config was parsed from, or its canonical form after set().
  const std::string& text() const { return text_; }
  /// Lower-case hex SHA-256 of text().
  std::string hash() const;
  /// Directory used to resolve relative raster paths.
  const std::string& base_dir() const { return base_dir_; }
  void set_base_dir(std::string dir) { base_dir_ = std::move(dir); }

  /// Keys are "section.key", or bare "key" for the top level.
  bool has(const std::string& key) const;
  const ConfigValue* find(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  /// Replaces or appends a value; text() becomes the canonical serialization.
  void set(const std::string& key, ConfigValue v);
  /// Copies every key of one section from another config.
  void merge_section(const Config& other, const std::string& section);
  std::string serialize() const;

private:
  std::vector<std::pair<std::string, ConfigValue>> entries_;
  std::string text_;
  std::string base_dir_ = ".";
};

/// Builds and validates the scenario. Coefficient, porosity and initial fields accept a
/// number, an expression in x and y, or "raster:path".
Scenario build_scenario(const Config& cfg);

/// Bound options from the [exponents] section.
BoundsConfig bounds_config(const Config& cfg);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace forch
