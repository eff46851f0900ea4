#include "forch.h"

#include <cmath>
#include <cstring>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include "forch/config.hpp"
#include "forch/constitutive.hpp"
#include "forch/error.hpp"
#include "forch/harness.hpp"

struct forch_scenario {
  forch::Config cfg;
};

struct forch_run {
  forch::LoadedRun data;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_field;

forch_status fail(forch_status s, const std::string& msg, const std::string& field = "") {
  g_error = msg;
  g_field = field;
  return s;
}

template <class F>
forch_status guard(F&& body) {
  g_error.clear();
  g_field.clear();
  try {
    return body();
  } catch (const forch::ValidationError& e) {
    return fail(FORCH_ERR_VALIDATION, e.what(), e.field());
  } catch (const forch::DomainError& e) {
    return fail(FORCH_ERR_VALIDATION, e.what());
  } catch (const forch::NumericError& e) {
    return fail(FORCH_ERR_NUMERIC, e.what());
  } catch (const forch::IoError& e) {
    return fail(FORCH_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(FORCH_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(FORCH_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

forch::LocalLaw make_law(const double* exps, const double* coefs, int terms) {
  if (!exps || !coefs) throw forch::ValidationError("law", "null arrays");
  if (terms < 1 || terms > forch::kMaxTerms) throw forch::ValidationError("law.exponents", "need 1 to 8 terms");
  if (exps[0] != 0.0) throw forch::ValidationError("law.exponents", "first exponent must be 0");
  forch::LocalLaw L;
  L.terms = terms;
  for (int i = 0; i < terms; ++i) {
    if (i > 0 && !(exps[i] > exps[i - 1])) throw forch::ValidationError("law.exponents", "must be strictly increasing");
    const bool end = i == 0 || i == terms - 1;
    if (!std::isfinite(coefs[i]) || (end ? !(coefs[i] > 0.0) : coefs[i] < 0.0))
      throw forch::ValidationError("law.coefficients[" + std::to_string(i) + "]",
                                   end ? "must be positive" : "must be non-negative");
    L.alpha[i] = exps[i];
    L.coef[i] = coefs[i];
  }
  return L;
}

void check_xi(double xi) {
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw forch::DomainError("xi must be finite and non-negative");
}

}  // namespace

extern "C" {

const char* forch_version(void) { return forch::library_version(); }
const char* forch_last_error(void) { return g_error.c_str(); }
const char* forch_last_error_field(void) { return g_field.c_str(); }
void forch_string_free(char* s) { std::free(s); }

forch_status forch_scenario_load(const char* path, forch_scenario** out) {
  if (!path || !out) return fail(FORCH_ERR_USAGE, "null argument");
  return guard([&] {
    *out = new forch_scenario{forch::Config::load(path)};
    return FORCH_OK;
  });
}

forch_status forch_scenario_parse(const char* text, const char* base_dir, forch_scenario** out) {
  if (!text || !out) return fail(FORCH_ERR_USAGE, "null argument");
  return guard([&] {
    *out = new forch_scenario{forch::Config::parse(text, base_dir ? base_dir : ".")};
    return FORCH_OK;
  });
}

forch_status forch_scenario_set(forch_scenario* sc, const char* key, const char* value) {
  if (!sc || !key || !value) return fail(FORCH_ERR_USAGE, "null argument");
  return guard([&] {
    sc->cfg.set(key, forch::ConfigValue::parse(value, key));
    return FORCH_OK;
  });
}

forch_status forch_scenario_validate(const forch_scenario* sc) {
  if (!sc) return fail(FORCH_ERR_USAGE, "null scenario");
  return guard([&] {
    forch::build_scenario(sc->cfg);
    return FORCH_OK;
  });
}

forch_status forch_scenario_hash(const forch_scenario* sc, char* buf, size_t len) {
  if (!sc || !buf) return fail(FORCH_ERR_USAGE, "null argument");
  return guard([&] {
    const std::string h = sc->cfg.hash();
    if (len < h.size() + 1) return fail(FORCH_ERR_USAGE, "hash buffer needs 65 bytes");
    std::memcpy(buf, h.c_str(), h.size() + 1);
    return FORCH_OK;
  });
}

forch_status forch_scenario_text(const forch_scenario* sc, char** out) {
  if (!sc || !out) return fail(FORCH_ERR_USAGE, "null argument");
  return guard([&] {
    *out = dup(sc->cfg.text());
    return FORCH_OK;
  });
}

void forch_scenario_free(forch_scenario* sc) { delete sc; }

forch_status forch_simulate(const forch_scenario* sc, const char* out_dir, int64_t seed) {
  if (!sc || !out_dir) return fail(FORCH_ERR_USAGE, "null argument");
  return guard([&] {
    std::optional<std::uint64_t> s;
    if (seed >= 0) s = static_cast<std::uint64_t>(seed);
    const forch::SimulateSummary r = forch::simulate_to_dir(sc->cfg, out_dir, s);
    if (!r.invariants_ok) return fail(FORCH_ERR_INVARIANT, "a discrete invariant failed; see manifest.json");
    return FORCH_OK;
  });
}

forch_status forch_run_open(const char* dir, forch_run** out) {
  if (!dir || !out) return fail(FORCH_ERR_USAGE, "null argument");
  return guard([&] {
    *out = new forch_run{forch::load_run(dir)};
    return FORCH_OK;
  });
}

size_t forch_run_snapshot_count(const forch_run* run) { return run ? run->data.run.p.steps() : 0; }

forch_status forch_run_time(const forch_run* run, size_t k, double* t) {
  if (!run || !t) return fail(FORCH_ERR_USAGE, "null argument");
  if (k >= run->data.run.p.steps()) return fail(FORCH_ERR_USAGE, "snapshot index out of range");
  *t = run->data.run.p.times()[k];
  return FORCH_OK;
}

forch_status forch_run_grid(const forch_run* run, int* nx, int* ny, double* dx, double* dy) {
  if (!run) return fail(FORCH_ERR_USAGE, "null run");
  const forch::Grid2D& g = run->data.sc.grid;
  if (nx) *nx = g.nx;
  if (ny) *ny = g.ny;
  if (dx) *dx = g.dx;
  if (dy) *dy = g.dy;
  return FORCH_OK;
}

forch_status forch_run_field(const forch_run* run, size_t k, int which, double* buf, size_t len) {
  if (!run || !buf) return fail(FORCH_ERR_USAGE, "null argument");
  const forch::RunResult& r = run->data.run;
  if (k >= r.p.steps()) return fail(FORCH_ERR_USAGE, "snapshot index out of range");
  const forch::SpaceTimeField* f = nullptr;
  switch (which) {
    case 0: f = &r.p; break;
    case 1: f = &r.pbar; break;
    case 2: f = &r.pbar_t; break;
    case 3: f = &r.grad_p; break;
    default: return fail(FORCH_ERR_USAGE, "field selector must be 0..3");
  }
  const auto& v = f->frame(k).values();
  if (len < v.size()) return fail(FORCH_ERR_USAGE, "buffer too small");
  std::memcpy(buf, v.data(), v.size() * sizeof(double));
  return FORCH_OK;
}

void forch_run_free(forch_run* run) { delete run; }

forch_status forch_bounds(const char* run_dir, const char* exponents_config, double window, int plot_csv,
                          char** report_json) {
  if (!run_dir) return fail(FORCH_ERR_USAGE, "null run directory");
  return guard([&] {
    forch::Config ex;
    forch::BoundsOptions opt;
    if (exponents_config) {
      ex = forch::Config::load(exponents_config);
      opt.exponents = &ex;
    }
    if (window > 0.0) opt.window = window;
    opt.plot_csv = plot_csv != 0;
    const auto j = forch::bounds_for_run(run_dir, opt);
    if (report_json) *report_json = dup(forch::dump_json(j));
    return FORCH_OK;
  });
}

forch_status forch_verify(const char* targets, uint64_t seed, const char* config, char** report_json) {
  if (!targets) return fail(FORCH_ERR_USAGE, "null target list");
  return guard([&] {
    std::vector<std::string> list;
    std::stringstream ss(targets);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) list.push_back(item);
    const forch::Config cfg = config ? forch::Config::load(config) : forch::Config::parse("");
    const forch::VerifyOutcome v = forch::verify(list, seed, cfg);
    if (report_json) *report_json = dup(forch::dump_json(v.report));
    if (!v.pass) return fail(FORCH_ERR_INVARIANT, "verification failed; see the report");
    return FORCH_OK;
  });
}

forch_status forch_sweep(const char* template_config, const char* axis, const double* values, size_t count,
                         const char* out_dir, int jobs, double window, int plot_csv, char** summary_json) {
  if (!template_config || !axis || (!values && count) || !out_dir) return fail(FORCH_ERR_USAGE, "null argument");
  return guard([&] {
    const forch::Config tmpl = forch::Config::load(template_config);
    forch::BoundsOptions opt;
    if (window > 0.0) opt.window = window;
    opt.plot_csv = plot_csv != 0;
    const forch::SweepOutcome s =
        forch::sweep(tmpl, axis, std::vector<double>(values, values + count), out_dir, jobs, opt);
    if (summary_json) *summary_json = dup(forch::dump_json(s.summary));
    if (!s.failures.empty()) {
      std::string msg = "sweep children failed:";
      for (const auto& f : s.failures) msg += "\n  " + f;
      return fail(FORCH_ERR_INVARIANT, msg);
    }
    return FORCH_OK;
  });
}

forch_status forch_report(const char* dir, int plot_csv, char** text) {
  if (!dir) return fail(FORCH_ERR_USAGE, "null directory");
  return guard([&] {
    const std::string t = forch::report(dir, plot_csv != 0);
    if (text) *text = dup(t);
    return FORCH_OK;
  });
}

forch_status forch_law_solve_s(const double* exps, const double* coefs, int terms, double xi, double* s) {
  if (!s) return fail(FORCH_ERR_USAGE, "null output");
  return guard([&] {
    check_xi(xi);
    *s = make_law(exps, coefs, terms).solve_s(xi);
    return FORCH_OK;
  });
}

forch_status forch_law_K(const double* exps, const double* coefs, int terms, double xi, double* K) {
  if (!K) return fail(FORCH_ERR_USAGE, "null output");
  return guard([&] {
    check_xi(xi);
    *K = make_law(exps, coefs, terms).K(xi);
    return FORCH_OK;
  });
}

forch_status forch_law_H(const double* exps, const double* coefs, int terms, double xi, double* H) {
  if (!H) return fail(FORCH_ERR_USAGE, "null output");
  return guard([&] {
    check_xi(xi);
    *H = make_law(exps, coefs, terms).H(xi);
    return FORCH_OK;
  });
}

}  // extern "C"
