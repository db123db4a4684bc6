#ifndef HAETAE_H
#define HAETAE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Negative values are errors.
 */
typedef enum HaetaeStatus {
  HAETAE_STATUS_OK = 0,
  /**
   * Verification ran and rejected the signature.
   */
  HAETAE_STATUS_REJECT = 1,
  HAETAE_STATUS_NULL_POINTER = -1,
  HAETAE_STATUS_INVALID_LEVEL = -2,
  HAETAE_STATUS_BUFFER_TOO_SMALL = -3,
  HAETAE_STATUS_INVALID_LENGTH = -4,
  HAETAE_STATUS_ARENA_EXHAUSTED = -5,
  HAETAE_STATUS_INTERNAL = -6,
} HaetaeStatus;

/**
 * Opaque handle.
 */
typedef struct HaetaeCtx HaetaeCtx;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a context for level 2, 3 or 5. `streamed` selects the
 * low-working-set path; otherwise the buffered reference path is used.
 *
 * # Safety
 * `out` must be a valid pointer to a `HaetaeCtx*`.
 */
enum HaetaeStatus haetae_ctx_new(uint32_t level, bool streamed, struct HaetaeCtx **out);

/**
 * # Safety
 * `ctx` must be null or a pointer from [`haetae_ctx_new`] not yet freed.
 */
void haetae_ctx_free(struct HaetaeCtx *ctx);

/**
 * # Safety
 * `ctx` must be a live context.
 */
size_t haetae_pk_bytes(const struct HaetaeCtx *ctx);

/**
 * # Safety
 * `ctx` must be a live context.
 */
size_t haetae_sk_bytes(const struct HaetaeCtx *ctx);

/**
 * # Safety
 * `ctx` must be a live context.
 */
size_t haetae_sig_bytes(const struct HaetaeCtx *ctx);

/**
 * Peak arena bytes used by poly, staging and workspace buffers during the last operation.
 *
 * # Safety
 * `ctx` must be a live context.
 */
size_t haetae_last_watermark(const struct HaetaeCtx *ctx);

/**
 * Deterministic key generation from a 32-byte seed.
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
enum HaetaeStatus haetae_keygen(struct HaetaeCtx *ctx,
                                const uint8_t *seed,
                                size_t seed_len,
                                uint8_t *pk,
                                size_t pk_cap,
                                uint8_t *sk,
                                size_t sk_cap);

/**
 * Signs `msg`; writes exactly `haetae_sig_bytes` bytes.
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
enum HaetaeStatus haetae_sign(struct HaetaeCtx *ctx,
                              const uint8_t *sk,
                              size_t sk_len,
                              const uint8_t *msg,
                              size_t msg_len,
                              uint8_t *sig,
                              size_t sig_cap);

/**
 * Returns `Ok` on accept and `Reject` on reject.
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
enum HaetaeStatus haetae_verify(struct HaetaeCtx *ctx,
                                const uint8_t *pk,
                                size_t pk_len,
                                const uint8_t *msg,
                                size_t msg_len,
                                const uint8_t *sig,
                                size_t sig_len);

/**
 * Static, NUL-terminated description of a status code. Takes the raw
 * integer so that any value coming from C is safe to pass.
 */
const char *haetae_status_str(int32_t status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAETAE_H */
