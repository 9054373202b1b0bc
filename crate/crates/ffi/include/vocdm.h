#ifndef VOCDM_H
#define VOCDM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VocdmStatus {
  VOCDM_STATUS_OK = 0,
  VOCDM_STATUS_NULL_POINTER = 1,
  VOCDM_STATUS_INVALID_ARGUMENT = 2,
  VOCDM_STATUS_LENGTH_MISMATCH = 3,
  VOCDM_STATUS_BUDGET_EXCEEDED = 4,
  VOCDM_STATUS_UNSUPPORTED = 5,
  VOCDM_STATUS_NUMERICAL = 6,
  VOCDM_STATUS_PANIC = 7,
} VocdmStatus;

typedef enum VocdmKind {
  VOCDM_KIND_FRESNEL = 0,
  VOCDM_KIND_FOURIER = 1,
  VOCDM_KIND_IDENTITY = 2,
} VocdmKind;

typedef enum VocdmConstellation {
  VOCDM_CONSTELLATION_BPSK = 0,
  VOCDM_CONSTELLATION_QPSK = 1,
  VOCDM_CONSTELLATION_PAM4 = 2,
} VocdmConstellation;

// Opaque modulator handle.
typedef struct VocdmModulator VocdmModulator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread; empty if none.
const char *vocdm_last_error(void);

// Library version as a static NUL-terminated string.
const char *vocdm_version(void);

// Creates a modulator for `m` sub-blocks of length `n`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum VocdmStatus vocdm_modulator_new(size_t m,
                                     size_t n,
                                     enum VocdmKind kind,
                                     struct VocdmModulator **out);

// Releases a handle; null is ignored.
//
// # Safety
// `handle` must come from [`vocdm_modulator_new`] and not be freed twice.
void vocdm_modulator_free(struct VocdmModulator *handle);

// Block size `K = M·N`, or 0 for a null handle.
//
// # Safety
// `handle` must be null or a live handle.
size_t vocdm_modulator_block_size(const struct VocdmModulator *handle);

// Maps `len` symbols to `len` time-domain samples. `len` must equal the
// block size. `input` and `output` may alias.
//
// # Safety
// `input` and `output` must each point to `2·len` doubles.
enum VocdmStatus vocdm_modulator_modulate(const struct VocdmModulator *handle,
                                          const double *input,
                                          double *output,
                                          size_t len);

// Inverse of [`vocdm_modulator_modulate`].
//
// # Safety
// `input` and `output` must each point to `2·len` doubles.
enum VocdmStatus vocdm_modulator_demodulate(const struct VocdmModulator *handle,
                                            const double *input,
                                            double *output,
                                            size_t len);

// Number of channel coefficients `(L+1)(2Q+1)`.
size_t vocdm_channel_coefficients(size_t l, size_t q);

// Effective channel of a modulator for the coefficient vector `coeffs`
// (ordered `(q+Q)(L+1)+l`), written row-major into `out` (`K·K` entries).
//
// # Safety
// `coeffs` must point to `2·coeffs_len` doubles and `out` to `2·out_len`.
enum VocdmStatus vocdm_effective_channel(const struct VocdmModulator *handle,
                                         size_t l,
                                         size_t q,
                                         const double *coeffs,
                                         size_t coeffs_len,
                                         double *out,
                                         size_t out_len);

// Number of distinct occupied sub-diagonals of the effective channel.
//
// # Safety
// `out` must be a valid pointer.
enum VocdmStatus vocdm_order_set_size(size_t l, size_t q, size_t m, size_t n, size_t *out);

// Exhaustive overall PAPR of a single sub-block of length `n`, searching
// at most `budget` candidates.
//
// # Safety
// `out` must be a valid pointer.
enum VocdmStatus vocdm_overall_papr(size_t n,
                                    enum VocdmKind kind,
                                    enum VocdmConstellation constellation,
                                    uint64_t budget,
                                    double *out);

// `Pr(PAPR > gamma)` under the Gaussian sample approximation for block
// size `k`; `gamma` is linear.
double vocdm_theoretical_ccdf(double gamma, size_t k);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VOCDM_H */
