/* C ABI for the rdrbm toolkit. Generated by cbindgen; do not edit. */

#ifndef RDRBM_H
#define RDRBM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum RdrbmStatus {
  RDRBM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RDRBM_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RDRBM_STATUS_INVALID_UTF8 = 2,
  /**
   * An argument violated its documented domain.
   */
  RDRBM_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Array lengths or model widths disagree.
   */
  RDRBM_STATUS_DIMENSION_MISMATCH = 4,
  /**
   * The underlying file operation failed.
   */
  RDRBM_STATUS_IO_ERROR = 5,
  /**
   * A text or binary payload failed to parse.
   */
  RDRBM_STATUS_PARSE_ERROR = 6,
  /**
   * An unexpected internal failure; the library state is still valid.
   */
  RDRBM_STATUS_INTERNAL_ERROR = 7,
} RdrbmStatus;

/**
 * Trained RBM parameters.
 */
typedef struct RdrbmRbm RdrbmRbm;

/**
 * A persistent block Gibbs chain over a fixed RBM.
 */
typedef struct RdrbmSampler RdrbmSampler;

/**
 * A discrete target energy model.
 */
typedef struct RdrbmTarget RdrbmTarget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the library version as a static nul-terminated string.
 */
const char *rdrbm_version(void);

/**
 * Copies the message for the most recent failure on this thread into
 * `buf` (truncated to `cap - 1` bytes, always nul-terminated when
 * `cap > 0`) and returns the full message length excluding the nul.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes of writes.
 */
size_t rdrbm_last_error_message(char *buf, size_t cap);

/**
 * Parses a target model from its canonical text form.
 *
 * # Safety
 * `text` must be a readable nul-terminated string and `out` a valid
 * destination pointer.
 */
enum RdrbmStatus rdrbm_target_parse(const char *text, struct RdrbmTarget **out);

/**
 * Loads a target model from a canonical text file.
 *
 * # Safety
 * `path` must be a readable nul-terminated string and `out` a valid
 * destination pointer.
 */
enum RdrbmStatus rdrbm_target_load(const char *path, struct RdrbmTarget **out);

/**
 * Releases a target model handle. Null is ignored.
 *
 * # Safety
 * `target` must be null or a pointer returned by a target constructor
 * that has not been freed yet.
 */
void rdrbm_target_free(struct RdrbmTarget *target);

/**
 * Number of binary units of the target, or 0 for a null handle.
 *
 * # Safety
 * `target` must be null or a live target handle.
 */
size_t rdrbm_target_nx(const struct RdrbmTarget *target);

/**
 * Effective (inverse-temperature scaled) energy of one configuration.
 *
 * # Safety
 * `target` must be a live handle, `bits` readable for `len` bytes, and
 * `out` a valid destination pointer.
 */
enum RdrbmStatus rdrbm_target_energy(const struct RdrbmTarget *target,
                                     const uint8_t *bits,
                                     size_t len,
                                     double *out);

/**
 * Loads trained RBM parameters from their binary file format.
 *
 * # Safety
 * `path` must be a readable nul-terminated string and `out` a valid
 * destination pointer.
 */
enum RdrbmStatus rdrbm_rbm_load(const char *path, struct RdrbmRbm **out);

/**
 * Releases an RBM handle. Null is ignored.
 *
 * # Safety
 * `rbm` must be null or a pointer returned by `rdrbm_rbm_load` that has
 * not been freed yet.
 */
void rdrbm_rbm_free(struct RdrbmRbm *rbm);

/**
 * Number of visible units, or 0 for a null handle.
 *
 * # Safety
 * `rbm` must be null or a live RBM handle.
 */
size_t rdrbm_rbm_nx(const struct RdrbmRbm *rbm);

/**
 * Number of hidden units, or 0 for a null handle.
 *
 * # Safety
 * `rbm` must be null or a live RBM handle.
 */
size_t rdrbm_rbm_nh(const struct RdrbmRbm *rbm);

/**
 * Free energy of one visible configuration (hidden units summed out).
 *
 * # Safety
 * `rbm` must be a live handle, `bits` readable for `len` bytes, and
 * `out` a valid destination pointer.
 */
enum RdrbmStatus rdrbm_rbm_free_energy(const struct RdrbmRbm *rbm,
                                       const uint8_t *bits,
                                       size_t len,
                                       double *out);

/**
 * Residual-variance score of the RBM against the target over a sample
 * set: twice the population variance of free energy minus effective
 * target energy. `samples` is row-major, `n_samples` rows of `nx` bytes.
 *
 * # Safety
 * `rbm` and `target` must be live handles, `samples` readable for
 * `n_samples * nx` bytes, and `out` a valid destination pointer.
 */
enum RdrbmStatus rdrbm_r_theta(const struct RdrbmRbm *rbm,
                               const struct RdrbmTarget *target,
                               const uint8_t *samples,
                               size_t n_samples,
                               size_t nx,
                               double *out);

/**
 * Creates a persistent block Gibbs sampler seeded deterministically from
 * `seed`, starting at the given visible configuration.
 *
 * # Safety
 * `rbm` must be a live handle, `init_bits` readable for `len` bytes, and
 * `out` a valid destination pointer. The sampler borrows nothing: the
 * RBM handle may be freed independently afterwards.
 */
enum RdrbmStatus rdrbm_sampler_new(const struct RdrbmRbm *rbm,
                                   uint64_t seed,
                                   const uint8_t *init_bits,
                                   size_t len,
                                   struct RdrbmSampler **out);

/**
 * Releases a sampler handle. Null is ignored.
 *
 * # Safety
 * `sampler` must be null or a pointer returned by `rdrbm_sampler_new`
 * that has not been freed yet.
 */
void rdrbm_sampler_free(struct RdrbmSampler *sampler);

/**
 * Advances the chain by `steps` block Gibbs steps and copies the current
 * visible configuration into `out_bits`. Zero steps reads the state
 * without advancing.
 *
 * # Safety
 * `sampler` must be a live handle and `out_bits` writable for `len`
 * bytes. The sampler must not be used concurrently from other threads.
 */
enum RdrbmStatus rdrbm_sampler_step(struct RdrbmSampler *sampler,
                                    size_t steps,
                                    uint8_t *out_bits,
                                    size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RDRBM_H */
