#include "forch/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "forch/error.hpp"
#include "forch/expr.hpp"
#include "forch/raster.hpp"

namespace forch {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "id", "seed",
      "grid.nx", "grid.ny", "grid.lx", "grid.ly", "grid.x0", "grid.y0",
      "law.exponents", "law.coefficients", "law.contrast",
      "porosity.phi",
      "boundary.psi", "boundary.amplitude", "boundary.initial",
      "time.T", "time.dt", "time.snapshot_every", "time.picard_max", "time.picard_tol", "time.cg_tol",
      "time.cg_max",
      "exponents.r", "exponents.r1", "exponents.r2", "exponents.c2", "exponents.theta", "exponents.window",
      "exponents.sobolev_c", "exponents.safety", "exponents.seed", "exponents.corpus_size", "exponents.qstar_cap",
      "verify.seed", "verify.constitutive_nx", "verify.xi_count", "verify.xi_min", "verify.xi_max",
      "verify.random_laws", "verify.inequality_nx", "verify.time_samples", "verify.corpus_size",
      "verify.recurrence_count", "verify.recurrence_steps", "verify.exponent_packs", "verify.decay_series"};
  return keys;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '\\' && quoted) {
      ++k;
      continue;
    }
    if (s[k] == '"') quoted = !quoted;
    if (s[k] == '#' && !quoted) return s.substr(0, k);
  }
  return s;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ConfigValue ConfigValue::of(double v) {
  ConfigValue c;
  c.kind = Kind::Number;
  c.number = v;
  return c;
}

ConfigValue ConfigValue::of(bool v) {
  ConfigValue c;
  c.kind = Kind::Bool;
  c.boolean = v;
  return c;
}

ConfigValue ConfigValue::of(std::string v) {
  ConfigValue c;
  c.kind = Kind::String;
  c.text = std::move(v);
  return c;
}

ConfigValue ConfigValue::parse(std::string_view lit, const std::string& key) {
  lit = trim(lit);
  if (lit.empty()) throw ValidationError(key, "missing value");
  if (lit.front() == '"') {
    std::string out;
    std::size_t k = 1;
    for (; k < lit.size() && lit[k] != '"'; ++k) {
      if (lit[k] == '\\' && k + 1 < lit.size()) ++k;
      out += lit[k];
    }
    if (k >= lit.size() || trim(lit.substr(k + 1)).size() != 0) throw ValidationError(key, "malformed string");
    return of(std::move(out));
  }
  if (lit.front() == '[') {
    if (lit.back() != ']') throw ValidationError(key, "unterminated list");
    ConfigValue list;
    list.kind = Kind::List;
    std::string_view body = trim(lit.substr(1, lit.size() - 2));
    if (body.empty()) return list;
    bool quoted = false;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= body.size(); ++k) {
      if (k < body.size()) {
        if (body[k] == '\\' && quoted) {
          ++k;
          continue;
        }
        if (body[k] == '"') quoted = !quoted;
        if (body[k] == '[' && !quoted) throw ValidationError(key, "nested lists are not supported");
        if (body[k] != ',' || quoted) continue;
      }
      ConfigValue item = parse(body.substr(start, k - start), key);
      list.items.push_back(std::move(item));
      start = k + 1;
    }
    return list;
  }
  if (lit == "true") return of(true);
  if (lit == "false") return of(false);
  double v = 0.0;
  const char* b = lit.data();
  const char* e = lit.data() + lit.size();
  if (*b == '+') ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v))
    throw ValidationError(key, "not a number, boolean, string or list: " + std::string(lit));
  return of(v);
}

std::string ConfigValue::serialize() const {
  switch (kind) {
    case Kind::Number: return format_number(number);
    case Kind::Bool: return boolean ? "true" : "false";
    case Kind::String: return quote(text);
    case Kind::List: {
      std::string s = "[";
      for (std::size_t k = 0; k < items.size(); ++k) s += (k ? ", " : "") + items[k].serialize();
      return s + "]";
    }
  }
  return {};
}

Config Config::parse(std::string text, std::string base_dir) {
  Config cfg;
  cfg.base_dir_ = std::move(base_dir);
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> sections = {"grid", "law", "porosity", "boundary",
                                                     "time", "exponents", "verify"};
      if (!sections.count(section)) throw ValidationError(where, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where, "expected key = value");
    const std::string name(trim(line.substr(0, eq)));
    const std::string key = section.empty() ? name : section + "." + name;
    if (!known_keys().count(key)) throw ValidationError(key, "unknown key");
    if (cfg.has(key)) throw ValidationError(key, "duplicate key");
    cfg.entries_.emplace_back(key, ConfigValue::parse(line.substr(eq + 1), key));
  }
  cfg.text_ = std::move(text);
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  auto dir = std::filesystem::absolute(std::filesystem::path(path)).parent_path().string();
  return parse(ss.str(), dir);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

std::string Config::hash() const { return sha256_hex(text_); }

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

const ConfigValue* Config::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

double Config::number(const std::string& key, double fallback) const {
  const ConfigValue* v = find(key);
  if (!v) return fallback;
  if (v->kind != ConfigValue::Kind::Number) throw ValidationError(key, "expected a number");
  return v->number;
}

int Config::integer(const std::string& key, int fallback) const {
  const ConfigValue* v = find(key);
  if (!v) return fallback;
  if (v->kind != ConfigValue::Kind::Number || v->number != std::floor(v->number) || std::abs(v->number) > 1e9)
    throw ValidationError(key, "expected an integer");
  return static_cast<int>(v->number);
}

std::string Config::string(const std::string& key, const std::string& fallback) const {
  const ConfigValue* v = find(key);
  if (!v) return fallback;
  if (v->kind != ConfigValue::Kind::String) throw ValidationError(key, "expected a string");
  return v->text;
}

void Config::set(const std::string& key, ConfigValue v) {
  if (!known_keys().count(key)) throw ValidationError(key, "unknown key");
  bool replaced = false;
  for (auto& [k, old] : entries_)
    if (k == key) {
      old = v;
      replaced = true;
    }
  if (!replaced) entries_.emplace_back(key, std::move(v));
  text_ = serialize();
}

void Config::merge_section(const Config& other, const std::string& section) {
  const std::string prefix = section + ".";
  for (const auto& [k, v] : other.entries_)
    if (k.rfind(prefix, 0) == 0) set(k, v);
}

std::string Config::serialize() const {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<std::string, const ConfigValue*>>> by_section;
  for (const auto& [k, v] : entries_) {
    const auto dot = k.find('.');
    const std::string sec = dot == std::string::npos ? "" : k.substr(0, dot);
    const std::string name = dot == std::string::npos ? k : k.substr(dot + 1);
    if (!by_section.count(sec)) order.push_back(sec);
    by_section[sec].emplace_back(name, &v);
  }
  std::stable_partition(order.begin(), order.end(), [](const std::string& s) { return s.empty(); });
  std::string out;
  for (const auto& sec : order) {
    if (!sec.empty()) out += (out.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
    for (const auto& [name, v] : by_section[sec]) out += name + " = " + v->serialize() + "\n";
  }
  return out;
}

namespace {

Field field_from(const ConfigValue& v, const Grid2D& g, const std::string& key, const std::string& base_dir) {
  if (v.kind == ConfigValue::Kind::Number) {
    Field f(g, v.number);
    return f;
  }
  if (v.kind != ConfigValue::Kind::String) throw ValidationError(key, "expected a number, expression or raster");
  if (v.text.rfind("raster:", 0) == 0) {
    std::filesystem::path p(v.text.substr(7));
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    Field f = read_raster(p.string());
    if (!(f.grid() == g)) throw ValidationError(key, "raster grid does not match [grid]");
    return f;
  }
  const Expr e = Expr::parse(v.text);
  if (e.depends_on(Var::T)) throw ValidationError(key, "must not depend on t");
  return Field::sample(g, [&](double x, double y) { return e.eval(x, y, 0.0); }, key);
}

}  // namespace

Scenario build_scenario(const Config& cfg) {
  Scenario sc;
  sc.id = cfg.string("id", "scenario");
  const int nx = cfg.integer("grid.nx", 32);
  const int ny = cfg.integer("grid.ny", nx);
  if (nx < 2) throw ValidationError("grid.nx", "must be >= 2");
  if (ny < 2) throw ValidationError("grid.ny", "must be >= 2");
  const double lx = cfg.number("grid.lx", 1.0), ly = cfg.number("grid.ly", 1.0);
  if (!(lx > 0.0)) throw ValidationError("grid.lx", "must be positive");
  if (!(ly > 0.0)) throw ValidationError("grid.ly", "must be positive");
  sc.grid = Grid2D::box(nx, ny, lx, ly, cfg.number("grid.x0", 0.0), cfg.number("grid.y0", 0.0));
  const Grid2D& g = sc.grid;

  const ConfigValue* ex = cfg.find("law.exponents");
  const ConfigValue* co = cfg.find("law.coefficients");
  if (!ex || ex->kind != ConfigValue::Kind::List) throw ValidationError("law.exponents", "expected a list");
  if (!co || co->kind != ConfigValue::Kind::List) throw ValidationError("law.coefficients", "expected a list");
  std::vector<double> exps;
  for (const auto& v : ex->items) {
    if (v.kind != ConfigValue::Kind::Number) throw ValidationError("law.exponents", "entries must be numbers");
    exps.push_back(v.number);
  }
  if (co->items.size() != exps.size())
    throw ValidationError("law.coefficients", "need one coefficient per exponent");
  std::vector<Field> coefs;
  for (std::size_t k = 0; k < co->items.size(); ++k)
    coefs.push_back(field_from(co->items[k], g, "law.coefficients[" + std::to_string(k) + "]", cfg.base_dir()));
  // Contrast c maps each coefficient to mean * (a / mean)^c, keeping its mean scale.
  const double contrast = cfg.number("law.contrast", 1.0);
  if (contrast != 1.0) {
    if (!std::isfinite(contrast)) throw ValidationError("law.contrast", "must be finite");
    for (auto& f : coefs) {
      double mean = 0.0;
      for (std::size_t c = 0; c < f.size(); ++c) mean += f[c];
      mean /= static_cast<double>(f.size());
      if (mean <= 0.0) continue;
      for (std::size_t c = 0; c < f.size(); ++c) f[c] = f[c] > 0.0 ? mean * std::pow(f[c] / mean, contrast) : 0.0;
    }
  }
  if (exps.size() == 1) {
    if (exps[0] != 0.0) throw ValidationError("law.exponents", "a one-term law must have exponent 0");
    for (std::size_t c = 0; c < coefs[0].size(); ++c)
      if (!(coefs[0][c] > 0.0)) throw ValidationError("law.coefficients[0]", "must be positive");
    sc.law = ForchheimerLaw::darcy(coefs[0]);
  } else {
    sc.law = ForchheimerLaw(exps, coefs);
  }

  const ConfigValue* phi = cfg.find("porosity.phi");
  sc.phi = phi ? field_from(*phi, g, "porosity.phi", cfg.base_dir()) : Field(g, 1.0);

  const double amp = cfg.number("boundary.amplitude", 1.0);
  if (!std::isfinite(amp)) throw ValidationError("boundary.amplitude", "must be finite");
  Expr psi = Expr::constant(0.0);
  if (const ConfigValue* v = cfg.find("boundary.psi")) {
    if (v->kind == ConfigValue::Kind::Number) psi = Expr::constant(v->number);
    else if (v->kind == ConfigValue::Kind::String) psi = Expr::parse(v->text);
    else throw ValidationError("boundary.psi", "expected a number or expression");
  }
  sc.boundary = BoundaryData(amp == 1.0 ? psi : Expr::constant(amp) * psi);

  const ConfigValue* init = cfg.find("boundary.initial");
  if (!init || (init->kind == ConfigValue::Kind::String && init->text == "psi")) {
    sc.p0 = sc.boundary.sample(g, 0.0);
  } else {
    sc.p0 = field_from(*init, g, "boundary.initial", cfg.base_dir());
  }

  sc.T = cfg.number("time.T", 1.0);
  sc.dt = cfg.number("time.dt", 1e-2);
  sc.snapshot_every = cfg.integer("time.snapshot_every", 1);
  sc.picard_max = cfg.integer("time.picard_max", 50);
  sc.picard_tol = cfg.number("time.picard_tol", 1e-9);
  sc.cg_tol = cfg.number("time.cg_tol", 1e-12);
  sc.cg_max = cfg.integer("time.cg_max", 20000);
  sc.validate();
  return sc;
}

BoundsConfig bounds_config(const Config& cfg) {
  BoundsConfig b;
  b.r = cfg.number("exponents.r", b.r);
  b.r1 = cfg.number("exponents.r1", b.r1);
  b.r2 = cfg.number("exponents.r2", b.r2);
  b.c2 = cfg.number("exponents.c2", b.c2);
  b.theta = cfg.number("exponents.theta", b.theta);
  b.window = cfg.number("exponents.window", b.window);
  b.sobolev_c = cfg.number("exponents.sobolev_c", b.sobolev_c);
  b.safety = cfg.number("exponents.safety", b.safety);
  b.seed = static_cast<std::uint64_t>(cfg.integer("exponents.seed", static_cast<int>(b.seed)));
  b.corpus_size = cfg.integer("exponents.corpus_size", b.corpus_size);
  b.qstar_cap = cfg.number("exponents.qstar_cap", b.qstar_cap);
  if (!(b.theta > 0.0 && b.theta < 1.0)) throw ValidationError("exponents.theta", "must lie in (0, 1)");
  if (!(b.window > 0.0)) throw ValidationError("exponents.window", "must be positive");
  if (!(b.safety >= 1.0)) throw ValidationError("exponents.safety", "must be >= 1");
  if (b.corpus_size < 1) throw ValidationError("exponents.corpus_size", "must be >= 1");
  if (!std::isnan(b.c2) && !(b.c2 > 0.0)) throw ValidationError("exponents.c2", "must be positive");
  if (!std::isnan(b.sobolev_c) && !(b.sobolev_c > 0.0)) throw ValidationError("exponents.sobolev_c", "must be positive");
  return b;
}

}  // namespace forch
