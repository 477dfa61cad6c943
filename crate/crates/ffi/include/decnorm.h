#ifndef DECNORM_H
#define DECNORM_H

#include <stddef.h>
#include <stdint.h>

// Which critical exponent [`decnorm_exponent`] evaluates.
enum DecnormExponent
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  DECNORM_EXPONENT_S = 0,
  DECNORM_EXPONENT_D = 1,
  DECNORM_EXPONENT_ALPHA = 2,
  DECNORM_EXPONENT_SIGMA = 3,
};
#ifndef __cplusplus
typedef int32_t DecnormExponent;
#endif // __cplusplus

// Result code of every fallible call.
enum DecnormStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  DECNORM_STATUS_OK = 0,
  DECNORM_STATUS_NULL_POINTER = 1,
  DECNORM_STATUS_INVALID_ARGUMENT = 2,
  DECNORM_STATUS_GRID_MISMATCH = 3,
  DECNORM_STATUS_BAND_VIOLATION = 4,
  DECNORM_STATUS_SUPPORT_VIOLATION = 5,
  DECNORM_STATUS_INSUFFICIENT_DIRECTIONS = 6,
  DECNORM_STATUS_FORMAT = 7,
  DECNORM_STATUS_IO = 8,
  DECNORM_STATUS_NUMERICAL = 9,
  DECNORM_STATUS_PANIC = 10,
};
#ifndef __cplusplus
typedef int32_t DecnormStatus;
#endif // __cplusplus

// A directional family sized for a grid.
typedef struct DecnormFamily DecnormFamily;

// A complex field on a grid.
typedef struct DecnormField DecnormField;

// A periodic grid `(ℝ/LZ)^n` with `M` points per axis.
typedef struct DecnormGrid DecnormGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *decnorm_last_error(void);

// Library version as a static NUL-terminated string.
const char *decnorm_version(void);

// Creates a grid of dimension `dim` with `points` per axis and side `side`.
//
// # Safety
// `out` must be valid for a pointer write.
DecnormStatus decnorm_grid_new(uintptr_t dim,
                               uintptr_t points,
                               double side,
                               struct DecnormGrid **out);

// # Safety
// `grid` must be null or a handle from `decnorm_grid_new` not yet freed.
void decnorm_grid_free(struct DecnormGrid *grid);

// Number of lattice points `M^n`.
//
// # Safety
// `grid` must be a live grid handle and `out` valid for a write.
DecnormStatus decnorm_grid_len(const struct DecnormGrid *grid, uintptr_t *out);

// Largest resolved frequency `π M / L`.
//
// # Safety
// `grid` must be a live grid handle and `out` valid for a write.
DecnormStatus decnorm_grid_xi_max(const struct DecnormGrid *grid, double *out);

// Builds a physical-space field from `len` real and imaginary parts in
// row-major order. `im` may be null for a real field.
//
// # Safety
// `re` (and `im` if non-null) must point to `len` doubles; `grid` must be
// live and `out` valid for a write.
DecnormStatus decnorm_field_new(const struct DecnormGrid *grid,
                                const double *re,
                                const double *im,
                                uintptr_t len,
                                struct DecnormField **out);

// Reads a field in the binary field format.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for a write.
DecnormStatus decnorm_field_read(const char *path, struct DecnormField **out);

// # Safety
// `field` must be null or a live field handle.
void decnorm_field_free(struct DecnormField *field);

// Copies the physical-space values into `re` and `im` (either may be
// null), each of capacity `len` which must equal the grid size.
//
// # Safety
// Non-null buffers must hold `len` doubles.
DecnormStatus decnorm_field_values(const struct DecnormField *field,
                                   double *re,
                                   double *im,
                                   uintptr_t len);

// Creates the default directional family for `grid`.
//
// # Safety
// `grid` must be live and `out` valid for a write.
DecnormStatus decnorm_family_new(const struct DecnormGrid *grid, struct DecnormFamily **out);

// # Safety
// `family` must be null or a live family handle.
void decnorm_family_free(struct DecnormFamily *family);

// Upper end of the frequency band the family resolves.
//
// # Safety
// `family` must be live and `out` valid for a write.
DecnormStatus decnorm_family_band_top(const struct DecnormFamily *family, double *out);

// Continuous norm `‖f‖_{D^s_{p,q}}`.
//
// # Safety
// Handles must be live and `out` valid for a write.
DecnormStatus decnorm_dec_norm(const struct DecnormField *field,
                               const struct DecnormFamily *family,
                               double p,
                               double q,
                               double s,
                               double *out);

// Discrete norm at frequency scale `r` over the cap partition of the
// field's dimension. The spectrum must lie in `r/2 <= |ξ| <= 2r`.
//
// # Safety
// `field` must be live and `out` valid for a write.
DecnormStatus decnorm_dec_norm_discrete(const struct DecnormField *field,
                                        double r,
                                        double p,
                                        double q,
                                        double s,
                                        double *out);

// Anisotropic norm `|x|_ω` for a direction and point of dimension `dim`.
// The direction need not be normalised.
//
// # Safety
// `omega` and `x` must point to `dim` doubles; `out` valid for a write.
DecnormStatus decnorm_aniso_norm(uintptr_t dim, const double *omega, const double *x, double *out);

// Critical exponent `kind` at `(p, q)` in dimension `n`; `q` is used by
// `D` only.
//
// # Safety
// `out` must be valid for a write.
DecnormStatus decnorm_exponent(DecnormExponent kind, double p, double q, uintptr_t n, double *out);

// Runs the internal self-test battery. `*passed` is 1 on a pass, else 0.
// A nonzero `fault` perturbs the frame so that the battery should fail.
//
// # Safety
// `passed` must be valid for a write.
DecnormStatus decnorm_selftest(uint64_t seed, double fault, int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DECNORM_H */
