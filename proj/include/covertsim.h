/*
 * covertsim C API
 *
 * Shared-library surface over the sensing-assisted covert communication
 * simulator.  All entry points return a covertsim_status; 0 is success and
 * the nonzero codes match the CLI exit codes.  Objects are opaque handles
 * that must be released with their matching free function.  Strings returned
 * through `char **` are heap-allocated and released with
 * covertsim_string_free.
 */

#ifndef COVERTSIM_H
#define COVERTSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum covertsim_status {
  COVERTSIM_OK = 0,
  COVERTSIM_E_ARGUMENT = 1,   /* bad handle or argument */
  COVERTSIM_E_CONFIG = 2,     /* configuration parse/validation error */
  COVERTSIM_E_INFEASIBLE = 3, /* a design reported infeasible */
  COVERTSIM_E_SOLVER = 4,     /* solver failure */
  COVERTSIM_E_IO = 5          /* file I/O failure */
} covertsim_status;

typedef struct covertsim_scenario covertsim_scenario;

const char* covertsim_version(void);

/* Scenario lifecycle.  err may be NULL; otherwise it receives a message. */
covertsim_status covertsim_scenario_default(covertsim_scenario** out);
covertsim_status covertsim_scenario_from_json(const char* json_text, covertsim_scenario** out,
                                              char* err, size_t err_len);
covertsim_status covertsim_scenario_from_file(const char* path, covertsim_scenario** out,
                                              char* err, size_t err_len);
void covertsim_scenario_free(covertsim_scenario* sc);

/* Canonical JSON of the resolved configuration. */
covertsim_status covertsim_scenario_to_json(const covertsim_scenario* sc, char** out_text);

/* Point overrides: key_path like "covertness.epsilon" or "seed", value as a
 * JSON literal ("0.05", "\"d10\"", "[0,0,30]"). */
covertsim_status covertsim_scenario_set(covertsim_scenario* sc, const char* key_path,
                                        const char* json_value, char* err, size_t err_len);

/* Tracking-only study: writes metric/CDF/summary files, returns a summary as
 * JSON text. format is "csv" or "json"; out_dir may be NULL to skip files. */
covertsim_status covertsim_run_track(const covertsim_scenario* sc, const char* out_dir,
                                     const char* format, char** summary_json, char* err,
                                     size_t err_len);

/* Full Monte-Carlo study over the configured schemes. */
covertsim_status covertsim_run_montecarlo(const covertsim_scenario* sc, const char* out_dir,
                                          const char* format, char** summary_json, char* err,
                                          size_t err_len);

/* Single-slot designs at the scenario's initial geometry; the report JSON
 * carries the designed metrics (and the Dinkelbach history for the robust
 * design). */
covertsim_status covertsim_run_design_perfect(const covertsim_scenario* sc,
                                              char** report_json, char* err, size_t err_len);
covertsim_status covertsim_run_design_robust(const covertsim_scenario* sc,
                                             char** report_json, char* err, size_t err_len);

/* Conic-solver self-test on random programs with planted optima. */
covertsim_status covertsim_solver_selfcheck(int programs, uint64_t seed, char** report_json,
                                            char* err, size_t err_len);

void covertsim_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* COVERTSIM_H */
