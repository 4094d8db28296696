#ifndef BAYESVOTE_H
#define BAYESVOTE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum BvStatus {
  BV_STATUS_OK = 0,
  BV_STATUS_NULL_POINTER = 1,
  BV_STATUS_INVALID_INPUT = 2,
  BV_STATUS_DIMENSION_MISMATCH = 3,
  BV_STATUS_INVALID_PSM = 4,
  BV_STATUS_BUFFER_TOO_SMALL = 5,
  BV_STATUS_UNSUPPORTED = 6,
  BV_STATUS_INTERNAL = 7,
} BvStatus;

/**
 * Opaque result of [`bv_solve`].
 */
typedef struct BvSolveResult BvSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *bv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bv_version(void);

/**
 * Finds the coalition strategy winning on the most sampled profiles.
 *
 * `alpha` holds the `m` scoring weights. `scores` holds `samples * m`
 * sincere score totals, one row per sampled profile of `n` voters.
 * A non-positive `time_limit_secs` means no limit. On success `*out`
 * receives a handle to free with [`bv_solve_result_free`].
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum BvStatus bv_solve(const uint64_t *alpha,
                       size_t m,
                       const uint64_t *scores,
                       size_t samples,
                       size_t n,
                       uint32_t c,
                       size_t d,
                       double time_limit_secs,
                       struct BvSolveResult **out);

/**
 * Releases a handle from [`bv_solve`]. Null is ignored.
 *
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void bv_solve_result_free(struct BvSolveResult *result);

/**
 * Number of samples the strategy wins; 0 for null.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t bv_solve_result_objective(const struct BvSolveResult *result);

/**
 * Number of samples solved over; 0 for null.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t bv_solve_result_samples(const struct BvSolveResult *result);

/**
 * Fraction of samples won after manipulation; NaN for null.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double bv_solve_result_win_probability(const struct BvSolveResult *result);

/**
 * Fraction of samples won only because of the coalition; NaN for null.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double bv_solve_result_manipulation_probability(const struct BvSolveResult *result);

/**
 * Whether the search finished, proving the objective maximal.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
bool bv_solve_result_optimal(const struct BvSolveResult *result);

/**
 * Writes the `m * m` strategy matrix: entry `(i, j)` counts coalition
 * ballots placing candidate `i` at position `j`.
 *
 * # Safety
 * `result` must be a live handle; `out` valid for `len` writes.
 */
enum BvStatus bv_solve_result_strategy(const struct BvSolveResult *result,
                                       uint32_t *out,
                                       size_t len);

/**
 * Writes the `c` coalition ballots as `c * m` candidate indices.
 *
 * # Safety
 * `result` must be a live handle; `out` valid for `len` writes.
 */
enum BvStatus bv_solve_result_ballots(const struct BvSolveResult *result,
                                      uint32_t *out,
                                      size_t len);

/**
 * Splits an `m * m` strategy matrix with line sums `c` into `c` ballots,
 * written as `c * m` candidate indices.
 *
 * # Safety
 * `psm` must be valid for `m * m` reads and `out` for `len` writes.
 */
enum BvStatus bv_recover_ballots(const uint32_t *psm,
                                 size_t m,
                                 uint32_t c,
                                 uint32_t *out,
                                 size_t len);

/**
 * Score lost by the sincere winner's replacement when `c` coalition
 * ballots (`c * m` indices) are added to `n` sincere ballots (`n * m`).
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum BvStatus bv_regret(const uint64_t *alpha,
                        size_t m,
                        const uint32_t *votes,
                        size_t n,
                        const uint32_t *coalition,
                        uint32_t c,
                        size_t d,
                        uint64_t *out);

/**
 * Sufficient sample count for k-approval at accuracy `eps` and
 * confidence `1 - delta`.
 *
 * # Safety
 * `out` must be writable.
 */
enum BvStatus bv_sample_complexity_kapproval(uint32_t c,
                                             size_t k,
                                             size_t m,
                                             double eps,
                                             double delta,
                                             uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BAYESVOTE_H */
