#ifndef BTMLAB_H
#define BTMLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BtmStatus {
  BTM_STATUS_OK = 0,
  BTM_STATUS_NULL_POINTER = 1,
  BTM_STATUS_BUFFER_TOO_SMALL = 2,
  BTM_STATUS_PARAMETER = 3,
  BTM_STATUS_REGIME = 4,
  BTM_STATUS_IO = 5,
  BTM_STATUS_NUMERIC = 6,
  BTM_STATUS_DATA = 7,
  BTM_STATUS_PANIC = 8,
} BtmStatus;

typedef enum BtmMethod {
  BTM_METHOD_DIRECT = 0,
  BTM_METHOD_TIME_CHANGE = 1,
} BtmMethod;

/**
 * Opaque trap landscape.
 */
typedef struct BtmEnvironment BtmEnvironment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length including the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t btm_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *btm_version(void);

/**
 * Sample Pareto(`alpha`) depths on `[lo, hi]`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum BtmStatus btm_env_sample(double alpha,
                              int64_t lo,
                              int64_t hi,
                              uint64_t seed,
                              struct BtmEnvironment **out);

/**
 * Unit depths on `[lo, hi]`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum BtmStatus btm_env_homogeneous(int64_t lo, int64_t hi, struct BtmEnvironment **out);

/**
 * Release an environment. Null is ignored.
 *
 * # Safety
 * `env` must come from a `btm_env_*` constructor and not be used again.
 */
void btm_env_free(struct BtmEnvironment *env);

/**
 * Depth at site `x` (must lie in the sampled window).
 *
 * # Safety
 * `env` must be a live handle and `out` valid for one write.
 */
enum BtmStatus btm_env_tau(const struct BtmEnvironment *env, int64_t x, double *out);

/**
 * Ball volume `sum_{|y - x| <= n} tau_y`.
 *
 * # Safety
 * `env` must be a live handle and `out` valid for one write.
 */
enum BtmStatus btm_env_volume(const struct BtmEnvironment *env, int64_t x, uint64_t n, double *out);

/**
 * Transition probabilities `P_x(X_t = y)` for `y = *out_lo, ...,
 * *out_lo + *out_len - 1`. If `cap` is too small, `*out_len` receives the
 * required length and `BTM_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `env` must be a live handle, `probs` valid for `cap` writes, and
 * `out_lo`, `out_len` valid for one write each.
 */
enum BtmStatus btm_transition_row(const struct BtmEnvironment *env,
                                  int64_t x,
                                  double t,
                                  double tol,
                                  double *probs,
                                  size_t cap,
                                  int64_t *out_lo,
                                  size_t *out_len);

/**
 * Heat kernel `P_x(X_t = y) / tau_y`.
 *
 * # Safety
 * `env` must be a live handle and `out` valid for one write.
 */
enum BtmStatus btm_heat_kernel(const struct BtmEnvironment *env,
                               int64_t x,
                               int64_t y,
                               double t,
                               double tol,
                               double *out);

/**
 * Green function of the ball of radius `n` around `x`, killed on exit.
 *
 * # Safety
 * `env` must be a live handle and `out` valid for one write.
 */
enum BtmStatus btm_green_function(const struct BtmEnvironment *env,
                                  int64_t x,
                                  int64_t n,
                                  int64_t y,
                                  int64_t z,
                                  double *out);

/**
 * Expected exit time from the ball of radius `n` around `x`, started at `y`.
 *
 * # Safety
 * `env` must be a live handle and `out` valid for one write.
 */
enum BtmStatus btm_expected_exit_time(const struct BtmEnvironment *env,
                                      int64_t x,
                                      int64_t n,
                                      int64_t y,
                                      double *out);

/**
 * Positions at time `t` of `m` independent walks from 0. Sites outside the
 * sampled window draw their depths from the same per-site stream.
 *
 * # Safety
 * `env` must be a live handle and `out` valid for `m` writes.
 */
enum BtmStatus btm_walk_endpoints(const struct BtmEnvironment *env,
                                  enum BtmMethod method,
                                  double t,
                                  size_t m,
                                  uint64_t seed,
                                  int64_t *out);

/**
 * Kolmogorov distance between the empirical law of `samples` and the
 * standard normal.
 *
 * # Safety
 * `samples` must be valid for `n` reads and `out` for one write.
 */
enum BtmStatus btm_ks_normal(const double *samples, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BTMLAB_H */
