#ifndef FORCH_H
#define FORCH_H

/* C interface to the forch library. Every call returns a forch_status; on failure
   forch_last_error() describes the problem for the calling thread. Strings returned
   through char** are owned by the caller and released with forch_string_free. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  FORCH_OK = 0,
  FORCH_ERR_INVARIANT = 1,  /* a checked property failed; reports are still produced */
  FORCH_ERR_VALIDATION = 2, /* bad configuration or arguments */
  FORCH_ERR_NUMERIC = 3,    /* an iterative method failed */
  FORCH_ERR_IO = 4,         /* missing or unreadable files */
  FORCH_ERR_USAGE = 5,      /* null handles, bad buffer sizes */
  FORCH_ERR_INTERNAL = 6
} forch_status;

typedef struct forch_scenario forch_scenario;
typedef struct forch_run forch_run;

const char* forch_version(void);
const char* forch_last_error(void);
/* Field named by the last validation error, or "" when there is none. */
const char* forch_last_error_field(void);
void forch_string_free(char* s);

/* Scenario configs */
forch_status forch_scenario_load(const char* path, forch_scenario** out);
forch_status forch_scenario_parse(const char* text, const char* base_dir, forch_scenario** out);
/* key is "section.key"; value is a literal as it would appear in the file. */
forch_status forch_scenario_set(forch_scenario* sc, const char* key, const char* value);
/* Full build and validation of the scenario the config describes. */
forch_status forch_scenario_validate(const forch_scenario* sc);
/* Writes the 64-character hex SHA-256 of the config text plus a terminator. */
forch_status forch_scenario_hash(const forch_scenario* sc, char* buf, size_t len);
forch_status forch_scenario_text(const forch_scenario* sc, char** out);
void forch_scenario_free(forch_scenario* sc);

/* Simulation. seed < 0 keeps the config's seed. */
forch_status forch_simulate(const forch_scenario* sc, const char* out_dir, int64_t seed);

/* Reading run directories */
forch_status forch_run_open(const char* dir, forch_run** out);
size_t forch_run_snapshot_count(const forch_run* run);
forch_status forch_run_time(const forch_run* run, size_t k, double* t);
forch_status forch_run_grid(const forch_run* run, int* nx, int* ny, double* dx, double* dy);
/* which: 0 = p, 1 = p minus boundary extension, 2 = its time derivative, 3 = |grad p|. */
forch_status forch_run_field(const forch_run* run, size_t k, int which, double* buf, size_t len);
void forch_run_free(forch_run* run);

/* Reports. exponents_config may be NULL; window <= 0 keeps the configured window. */
forch_status forch_bounds(const char* run_dir, const char* exponents_config, double window, int plot_csv,
                          char** report_json);
/* targets: comma-separated list of constitutive, inequalities, recurrence, all.
   config may be NULL. Returns FORCH_ERR_INVARIANT, with the report, when a check fails. */
forch_status forch_verify(const char* targets, uint64_t seed, const char* config, char** report_json);
/* Returns FORCH_ERR_INVARIANT, with the summary, when any child run failed. */
forch_status forch_sweep(const char* template_config, const char* axis, const double* values, size_t count,
                         const char* out_dir, int jobs, double window, int plot_csv, char** summary_json);
forch_status forch_report(const char* dir, int plot_csv, char** text);

/* Scalar constitutive helpers for a law with `terms` terms (2..8, or 1 for the Darcy form). */
forch_status forch_law_solve_s(const double* exponents, const double* coefficients, int terms, double xi,
                               double* s);
forch_status forch_law_K(const double* exponents, const double* coefficients, int terms, double xi, double* K);
forch_status forch_law_H(const double* exponents, const double* coefficients, int terms, double xi, double* H);

#ifdef __cplusplus
}
#endif

#endif
