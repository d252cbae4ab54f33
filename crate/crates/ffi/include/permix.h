#ifndef PERMIX_H
#define PERMIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PermixStatus {
  PERMIX_STATUS_OK = 0,
  PERMIX_STATUS_NULL_POINTER = 1,
  PERMIX_STATUS_INVALID_ARGUMENT = 2,
  PERMIX_STATUS_INFEASIBLE = 3,
  PERMIX_STATUS_NUMERIC = 4,
  PERMIX_STATUS_RESOURCE = 5,
  PERMIX_STATUS_PANIC = 6,
} PermixStatus;

/**
 * A walk driven by a conjugacy class, started at the identity.
 */
typedef struct PermixWalk PermixWalk;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (truncated and
 * NUL-terminated) and returns its full length in bytes, excluding the NUL.
 * Passing a null `buf` only returns the length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t permix_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *permix_version(void);

/**
 * Creates a walk on `n` points for the class `"j:c,..."`.
 *
 * # Safety
 * `class_spec` must be a valid NUL-terminated string and `out` a valid
 * pointer. The handle written to `*out` must be released with
 * [`permix_walk_free`].
 */
enum PermixStatus permix_walk_new(size_t n,
                                  const char *class_spec,
                                  uint64_t seed,
                                  struct PermixWalk **out);

/**
 * Advances the walk by `steps` steps.
 *
 * # Safety
 * `walk` must be a live handle from [`permix_walk_new`].
 */
enum PermixStatus permix_walk_step(struct PermixWalk *walk, uint64_t steps);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `walk` must be null or a live handle.
 */
size_t permix_walk_n(const struct PermixWalk *walk);

/**
 * Steps taken so far, or 0 for a null handle.
 *
 * # Safety
 * `walk` must be null or a live handle.
 */
uint64_t permix_walk_steps(const struct PermixWalk *walk);

/**
 * Writes the 1-based images of the current permutation into `buf`, which
 * must hold exactly `n` entries.
 *
 * # Safety
 * `walk` must be a live handle and `buf` must point to `len` writable
 * `uint32_t`.
 */
enum PermixStatus permix_walk_images(const struct PermixWalk *walk, uint32_t *buf, size_t len);

/**
 * Number of cycles of the current permutation, fixed points included.
 *
 * # Safety
 * `walk` must be a live handle and `out` a valid pointer.
 */
enum PermixStatus permix_walk_cycle_count(const struct PermixWalk *walk, size_t *out);

/**
 * Releases a walk. Null is ignored.
 *
 * # Safety
 * `walk` must be null or a handle from [`permix_walk_new`] that has not
 * been freed.
 */
void permix_walk_free(struct PermixWalk *walk);

/**
 * The giant fraction `θ(c)` for the limit profile of `class_spec`, with the
 * solver residual.
 *
 * # Safety
 * `class_spec` must be a valid NUL-terminated string; `theta_out` must be
 * valid; `residual_out` may be null.
 */
enum PermixStatus permix_theta(const char *class_spec,
                               double c,
                               double *theta_out,
                               double *residual_out);

/**
 * Exact total-variation profile from the identity for `t = 0..=t_max`.
 * Both buffers must hold `t_max + 1` entries.
 *
 * # Safety
 * `class_spec` must be a valid NUL-terminated string; `tv_coset` and
 * `tv_poissonized` must point to `len` writable doubles.
 */
enum PermixStatus permix_tv_profile(size_t n,
                                    const char *class_spec,
                                    uint64_t t_max,
                                    double *tv_coset,
                                    double *tv_poissonized,
                                    size_t len);

/**
 * Largest component of the hypergraph process after `⌊cn/k⌋` packets,
 * as a fraction of `n`.
 *
 * # Safety
 * `class_spec` must be a valid NUL-terminated string and `out` valid.
 */
enum PermixStatus permix_giant_fraction(size_t n,
                                        const char *class_spec,
                                        double c,
                                        uint64_t seed,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERMIX_H */
