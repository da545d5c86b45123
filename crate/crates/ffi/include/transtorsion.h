#ifndef TRANSTORSION_H
#define TRANSTORSION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum TtStatus {
  TT_STATUS_OK = 0,
  TT_STATUS_NULL_POINTER = 1,
  TT_STATUS_INVALID_ARGUMENT = 2,
  TT_STATUS_NON_SYMPLECTIC = 3,
  TT_STATUS_CONDITIONING_EXCEEDED = 4,
  TT_STATUS_ORACLE_MISMATCH = 5,
  TT_STATUS_PANIC = 6,
} TtStatus;

typedef enum TtPrecision {
  TT_PRECISION_STANDARD = 0,
  TT_PRECISION_EXTENDED = 1,
  TT_PRECISION_EXACT = 2,
} TtPrecision;

typedef enum TtClassification {
  TT_CLASSIFICATION_HYPERBOLIC_REAL = 0,
  TT_CLASSIFICATION_HYPERBOLIC_COMPLEX = 1,
  TT_CLASSIFICATION_NON_HYPERBOLIC_ELLIPTIC = 2,
  TT_CLASSIFICATION_NON_HYPERBOLIC_PARABOLIC = 3,
  TT_CLASSIFICATION_MIXED = 4,
} TtClassification;

/**
 * A validated symplectic homoclinic matrix.
 */
typedef struct TtHomoclinic TtHomoclinic;

/**
 * The spectral report of one transition matrix.
 */
typedef struct TtReport TtReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (nul-terminated,
 * truncated to `len`). Returns the full message length without the nul, or 0
 * when no error has occurred.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t tt_last_error(char *buf, size_t len);

/**
 * Library version as a static nul-terminated string.
 */
const char *tt_version(void);

/**
 * Builds a homoclinic matrix from 16 row-major entries in `(phi, s, rho, u)` order.
 *
 * # Safety
 * `entries` must point to 16 doubles; `out` must be a valid pointer.
 */
enum TtStatus tt_homoclinic_new(const double *entries, struct TtHomoclinic **out);

/**
 * The shear matrix: identity with `delta` in the `(rho, phi)` entry.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TtStatus tt_homoclinic_shear(double delta, struct TtHomoclinic **out);

/**
 * Releases a matrix; null is ignored.
 *
 * # Safety
 * `h` must be null or a handle from this library not yet freed.
 */
void tt_homoclinic_free(struct TtHomoclinic *h);

/**
 * The transversality determinant and the `d22` entry.
 *
 * # Safety
 * `h` must be a valid handle; `delta` and `d22` valid pointers.
 */
enum TtStatus tt_homoclinic_transversality(const struct TtHomoclinic *h,
                                           double *delta,
                                           double *d22);

/**
 * Spectral report of `Π·Df^n` for the linear model `(omega, nu, lambda)`.
 *
 * # Safety
 * `h` must be a valid handle; `out` a valid pointer.
 */
enum TtStatus tt_analyze(const struct TtHomoclinic *h,
                         double omega,
                         double nu,
                         double lambda,
                         uint32_t n,
                         enum TtPrecision precision,
                         struct TtReport **out);

/**
 * Releases a report; null is ignored.
 *
 * # Safety
 * `r` must be null or a handle from this library not yet freed.
 */
void tt_report_free(struct TtReport *r);

/**
 * `A` and `B` of `x^4 + A x^3 + B x^2 + A x + 1`.
 *
 * # Safety
 * `r` must be a valid handle; `a` and `b` valid pointers.
 */
enum TtStatus tt_report_coefficients(const struct TtReport *r, double *a, double *b);

/**
 * The four eigenvalues as real and imaginary parts.
 *
 * # Safety
 * `r` must be a valid handle; `re` and `im` must each hold 4 doubles.
 */
enum TtStatus tt_report_eigenvalues(const struct TtReport *r, double *re, double *im);

/**
 * Classification and distance of the spectrum to the unit circle.
 *
 * # Safety
 * `r` must be a valid handle; `class` and `distance` valid pointers.
 */
enum TtStatus tt_report_classification(const struct TtReport *r,
                                       enum TtClassification *class_,
                                       double *distance);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRANSTORSION_H */
