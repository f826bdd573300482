#ifndef ENTMONO_H
#define ENTMONO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum EmStatus {
  EM_STATUS_OK = 0,
  EM_STATUS_NULL_POINTER = 1,
  EM_STATUS_INVALID_UTF8 = 2,
  EM_STATUS_INVALID_INDEX = 3,
  EM_STATUS_DIMENSION_MISMATCH = 4,
  EM_STATUS_INVALID_STATE = 5,
  EM_STATUS_DOMAIN = 6,
  EM_STATUS_UNSUPPORTED = 7,
  EM_STATUS_IO = 8,
  EM_STATUS_PARSE = 9,
  EM_STATUS_PANIC = 10,
} EmStatus;

/**
 * Opaque inequality report.
 */
typedef struct EmReport EmReport;

/**
 * Opaque quantum state.
 */
typedef struct EmState EmState;

/**
 * Scalar fields of a report.
 */
typedef struct EmReportSummary {
  double alpha;
  double gamma;
  double lhs;
  double rhs;
  double residual;
  bool pass;
  bool premise_ok;
  bool upper;
} EmReportSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failing call on this thread (empty after success).
 * The pointer stays valid until the next call on this thread.
 */
const char *em_last_error(void);

/**
 * Builds a state from a family shorthand such as `dicke:4,2` or `ghz:3`.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must point to writable storage.
 */
enum EmStatus em_state_from_family(const char *family, struct EmState **out);

/**
 * Parses a state from its JSON record `{dims, kind, data}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must point to writable storage.
 */
enum EmStatus em_state_from_json(const char *json, struct EmState **out);

/**
 * Serializes a state to JSON. Release the string with [`em_string_free`].
 *
 * # Safety
 * `state` must be a live handle; `out` must point to writable storage.
 */
enum EmStatus em_state_to_json(const struct EmState *state, char **out);

/**
 * Number of subsystems of a state.
 *
 * # Safety
 * `state` must be a live handle; `out` must point to writable storage.
 */
enum EmStatus em_state_num_subsystems(const struct EmState *state, size_t *out);

/**
 * Releases a state handle. Null is ignored.
 *
 * # Safety
 * `state` must be null or a handle not yet released.
 */
void em_state_free(struct EmState *state);

/**
 * Evaluates a measure across a cut such as `0|rest` or `0|1`.
 *
 * `measure` is a name with optional inline parameters (`tsallis:0.7`,
 * `unified:1.4,0.6`); NaN `q` or `s` means "not given".
 *
 * # Safety
 * String arguments must be NUL-terminated; `state` must be a live handle;
 * `out` must point to writable storage.
 */
enum EmStatus em_measure(const struct EmState *state,
                         const char *measure,
                         double q,
                         double s,
                         const char *cut,
                         double *out);

/**
 * Evaluates a monogamy relation (`base`, `thm1` .. `thm9`).
 *
 * NaN `alpha` selects the relation's default exponent; `gamma` is `auto` or a
 * number, null meaning `auto`.
 *
 * # Safety
 * String arguments must be NUL-terminated or (for `gamma`) null; `state` must be
 * a live handle; `out` must point to writable storage.
 */
enum EmStatus em_check(const struct EmState *state,
                       const char *kind,
                       const char *measure,
                       double q,
                       double s,
                       const char *cut,
                       double alpha,
                       const char *gamma,
                       struct EmReport **out);

/**
 * Copies the scalar fields of a report.
 *
 * # Safety
 * `report` must be a live handle; `out` must point to writable storage.
 */
enum EmStatus em_report_summary(const struct EmReport *report, struct EmReportSummary *out);

/**
 * Serializes a full report (including per-term weights) to JSON.
 * Release the string with [`em_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must point to writable storage.
 */
enum EmStatus em_report_to_json(const struct EmReport *report, char **out);

/**
 * Releases a report handle. Null is ignored.
 *
 * # Safety
 * `report` must be null or a handle not yet released.
 */
void em_report_free(struct EmReport *report);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet released.
 */
void em_string_free(char *s);

/**
 * Haar mean of `M` on the `n`-dimensional marginal of a pure state on C^n (x) C^s.
 *
 * # Safety
 * `out` must point to writable storage.
 */
enum EmStatus em_lubkin_mean(size_t n, size_t s, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENTMONO_H */
