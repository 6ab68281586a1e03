/* C interface to the vineyard row-navigation simulator. */

#ifndef VINEYARD_NAV_H
#define VINEYARD_NAV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of an API call.
typedef enum VnStatus {
  VN_STATUS_OK = 0,
  // NULL pointer, non-UTF-8 string, or a value out of range.
  VN_STATUS_INVALID_ARGUMENT = 1,
  // Scenario JSON did not parse.
  VN_STATUS_PARSE = 2,
  // A trial could not confirm enough trunks to fit the working row.
  VN_STATUS_SEARCH_FAILED = 3,
  // A trial hit its tick budget before finishing.
  VN_STATUS_BUDGET_EXCEEDED = 4,
  // Writing an output file failed.
  VN_STATUS_IO = 5,
} VnStatus;

// Opaque simulation configuration handle.
typedef struct VnScenario VnScenario;

// Opaque experiment result handle.
typedef struct VnSummary VnSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Borrowed library version string, valid for the process lifetime.
const char *vn_version(void);

// Message for the most recent failure on this thread, or NULL if none.
// The pointer is invalidated by the next failing call on the same thread.
const char *vn_last_error_message(void);

// Frees a string returned by this library. NULL is a no-op.
//
// # Safety
// `s` must be NULL or a pointer previously returned by a `vn_*` function
// that documents `vn_string_free` as its deallocator, not yet freed.
void vn_string_free(char *s);

// New scenario with the built-in defaults (single row of five trunks,
// ten trials). Free with `vn_scenario_free`.
struct VnScenario *vn_scenario_default(void);

// Parses a scenario from JSON. Returns NULL on failure and reports the
// reason through `status` and `vn_last_error_message`.
//
// # Safety
// `json` must be NULL or a NUL-terminated string; `status` must be NULL
// or writable.
struct VnScenario *vn_scenario_from_json(const char *json, enum VnStatus *status);

// Pretty-printed JSON for the scenario. Free with `vn_string_free`;
// returns NULL if `scenario` is NULL.
//
// # Safety
// `scenario` must be NULL or a live handle from this library.
char *vn_scenario_to_json(const struct VnScenario *scenario);

// Sets the base seed used to derive per-trial RNG streams.
//
// # Safety
// `scenario` must be NULL or a live handle from this library.
enum VnStatus vn_scenario_set_seed(struct VnScenario *scenario, uint64_t seed);

// Sets the working side: 0 = left, 1 = right.
//
// # Safety
// `scenario` must be NULL or a live handle from this library.
enum VnStatus vn_scenario_set_work_side(struct VnScenario *scenario, int side);

// Sets the number of trials (must be at least 1).
//
// # Safety
// `scenario` must be NULL or a live handle from this library.
enum VnStatus vn_scenario_set_trials(struct VnScenario *scenario, uint64_t n);

// Frees a scenario handle. NULL is a no-op.
//
// # Safety
// `scenario` must be NULL or a live handle from this library, not yet freed.
void vn_scenario_free(struct VnScenario *scenario);

// Runs every trial of the scenario and returns the arrival summary.
//
// `status` reports Ok when all trials finished, otherwise the failure of
// the first unsuccessful trial. A summary is returned in either case (and
// only NULL when the scenario itself is NULL or invalid), so partial
// results stay inspectable. Free the summary with `vn_summary_free`.
//
// # Safety
// `scenario` must be NULL or a live handle; `status` NULL or writable.
struct VnSummary *vn_run_experiment(const struct VnScenario *scenario, enum VnStatus *status);

// Mean arrival error in meters; NaN if `summary` is NULL or empty.
//
// # Safety
// `summary` must be NULL or a live handle from this library.
double vn_summary_mean_error_m(const struct VnSummary *summary);

// Population standard deviation of arrival error in meters; NaN if
// `summary` is NULL or empty.
//
// # Safety
// `summary` must be NULL or a live handle from this library.
double vn_summary_std_error_m(const struct VnSummary *summary);

// Fraction of trials that finished; NaN if `summary` is NULL.
//
// # Safety
// `summary` must be NULL or a live handle from this library.
double vn_summary_completion_rate(const struct VnSummary *summary);

// Total arrivals recorded across all trials; 0 if `summary` is NULL.
//
// # Safety
// `summary` must be NULL or a live handle from this library.
uint64_t vn_summary_arrival_count(const struct VnSummary *summary);

// Number of trials in the summary; 0 if `summary` is NULL.
//
// # Safety
// `summary` must be NULL or a live handle from this library.
uint64_t vn_summary_trial_count(const struct VnSummary *summary);

// Writes the summary CSV (per-arrival rows plus an aggregate block).
//
// # Safety
// `summary` must be NULL or a live handle; `path` NULL or NUL-terminated.
enum VnStatus vn_summary_write_csv(const struct VnSummary *summary, const char *path);

// Pretty-printed JSON for the summary. Free with `vn_string_free`;
// returns NULL if `summary` is NULL.
//
// # Safety
// `summary` must be NULL or a live handle from this library.
char *vn_summary_to_json(const struct VnSummary *summary);

// Frees a summary handle. NULL is a no-op.
//
// # Safety
// `summary` must be NULL or a live handle from this library, not yet freed.
void vn_summary_free(struct VnSummary *summary);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* VINEYARD_NAV_H */
