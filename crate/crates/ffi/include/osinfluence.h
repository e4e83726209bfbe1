#ifndef OSINFLUENCE_H
#define OSINFLUENCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * How to compute an influence profile.
 */
typedef enum OsiMethod {
  /**
   * Exact, else closed form, else Monte Carlo.
   */
  OSI_METHOD_AUTO = 0,
  OSI_METHOD_EXACT = 1,
  OSI_METHOD_CLOSED_FORM = 2,
  OSI_METHOD_MONTE_CARLO = 3,
} OsiMethod;

/**
 * Status codes, numbered like the command-line exit codes.
 */
typedef enum OsiStatus {
  OSI_STATUS_OK = 0,
  OSI_STATUS_INTERNAL = 1,
  OSI_STATUS_INVALID_INPUT = 2,
  OSI_STATUS_INCOMPATIBLE_METHOD = 3,
  OSI_STATUS_TAINTED_SAMPLE = 4,
  OSI_STATUS_NUMERICAL = 6,
  OSI_STATUS_NULL_ARGUMENT = 7,
} OsiStatus;

/**
 * A function on `[0, 1]^n`.
 */
typedef struct OsiFunction OsiFunction;

/**
 * `I(f, 1..n)` with the mean and formal tail of the projection.
 */
typedef struct OsiProfile OsiProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. Owned by the library.
 */
const char *osi_last_error_message(void);

/**
 * Library version, a static string.
 */
const char *osi_version(void);

/**
 * Parses a JSON function description.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OsiStatus osi_function_from_json(const char *json, struct OsiFunction **out);

/**
 * Releases a function; null is ignored.
 *
 * # Safety
 * `f` must come from [`osi_function_from_json`] and not be used afterwards.
 */
void osi_function_free(struct OsiFunction *f);

/**
 * Number of variables, or 0 for null.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t osi_function_arity(const struct OsiFunction *f);

/**
 * Computes `I(f, 1..n)`. `samples` and `seed` are used by the Monte-Carlo method only.
 *
 * # Safety
 * `f` must be a live handle and `out` a valid pointer.
 */
enum OsiStatus osi_influence(const struct OsiFunction *f,
                             enum OsiMethod method,
                             uint64_t samples,
                             uint64_t seed,
                             struct OsiProfile **out);

/**
 * Coefficient of determination of the best shifted L-statistic; `std_error` may be null
 * and receives NaN for exact methods.
 *
 * # Safety
 * `f` must be a live handle, `value` a valid pointer, `std_error` null or valid.
 */
enum OsiStatus osi_r_squared(const struct OsiFunction *f,
                             enum OsiMethod method,
                             uint64_t samples,
                             uint64_t seed,
                             double *value,
                             double *std_error);

/**
 * Releases a profile; null is ignored.
 *
 * # Safety
 * `p` must come from [`osi_influence`] and not be used afterwards.
 */
void osi_profile_free(struct OsiProfile *p);

/**
 * Number of indices `n`, or 0 for null.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t osi_profile_len(const struct OsiProfile *p);

/**
 * Method that produced the profile.
 *
 * # Safety
 * `p` must be null or a live handle; null reports `Auto`.
 */
enum OsiMethod osi_profile_method(const struct OsiProfile *p);

/**
 * `I(f, k)` for `k` in `1..=n`; `std_error` may be null and receives NaN when exact.
 *
 * # Safety
 * `p` must be a live handle, `value` a valid pointer, `std_error` null or valid.
 */
enum OsiStatus osi_profile_index(const struct OsiProfile *p,
                                 size_t k,
                                 double *value,
                                 double *std_error);

/**
 * `<f, 1>`.
 *
 * # Safety
 * `p` must be a live handle and `value` a valid pointer.
 */
enum OsiStatus osi_profile_mean(const struct OsiProfile *p, double *value);

/**
 * `I(f, k)` as a rational string such as `"-1/5"`; fails with `IncompatibleMethod`
 * when the profile is not exact. Release the string with [`osi_string_free`].
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
enum OsiStatus osi_profile_exact_string(const struct OsiProfile *p, size_t k, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void osi_string_free(char *s);

/**
 * `I(f, k)` for `f = (x_1 ... x_n)^c` by the Gamma-function closed form, `c > -1/2`.
 *
 * # Safety
 * `value` must be a valid pointer.
 */
enum OsiStatus osi_power_product_influence(double c, size_t n, size_t k, double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OSINFLUENCE_H */
