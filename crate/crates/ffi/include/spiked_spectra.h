#ifndef SPIKED_SPECTRA_H
#define SPIKED_SPECTRA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_DOMAIN = 1,
  SS_STATUS_VALIDATION = 2,
  SS_STATUS_ACCURACY = 3,
  SS_STATUS_NUMERICAL = 4,
  SS_STATUS_NOT_MOMENT_SEQUENCE = 5,
  SS_STATUS_SINGULAR_POINT = 6,
  SS_STATUS_COST_GUARD = 7,
  SS_STATUS_IO = 8,
  SS_STATUS_NULL_POINTER = 9,
  SS_STATUS_OUT_OF_RANGE = 10,
  SS_STATUS_PANIC = 11,
} SsStatus;

typedef enum SsLineLaw {
  SS_LINE_LAW_SEMICIRCLE = 0,
  SS_LINE_LAW_MARCHENKO_PASTUR = 1,
  SS_LINE_LAW_SPIKED_SEMICIRCLE = 2,
  SS_LINE_LAW_SPIKED_MARCHENKO_PASTUR = 3,
  SS_LINE_LAW_MEIXNER = 4,
  SS_LINE_LAW_MEIXNER_NORMALIZED = 5,
} SsLineLaw;

typedef enum SsModel {
  SS_MODEL_HERMITE = 0,
  SS_MODEL_LAGUERRE = 1,
} SsModel;

typedef struct SsCircleMeasure SsCircleMeasure;

typedef struct SsJacobi SsJacobi;

typedef struct SsLineMeasure SsLineMeasure;

typedef struct SsVerblunsky SsVerblunsky;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *ss_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *ss_version(void);

/**
 * Builds a limit law on the line. Parameters not used by `law` are ignored:
 * spiked semicircle reads `p1 = θ`; Marchenko-Pastur reads `p1 = τ`; spiked
 * Marchenko-Pastur reads `p1 = τ, p2 = θ`; Meixner laws read `p1 = b, p2 = c`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum SsStatus ss_line_law_new(enum SsLineLaw law, double p1, double p2, struct SsLineMeasure **out);

/**
 * # Safety
 * `mu` must come from this library and not be used afterwards. Null is a no-op.
 */
void ss_line_free(struct SsLineMeasure *mu);

/**
 * # Safety
 * Pointers must be valid; `mu` must be a live handle.
 */
enum SsStatus ss_line_total_mass(const struct SsLineMeasure *mu, double *out);

/**
 * Absolutely continuous density at `x`.
 *
 * # Safety
 * Pointers must be valid; `mu` must be a live handle.
 */
enum SsStatus ss_line_density(const struct SsLineMeasure *mu, double x, double *out);

/**
 * # Safety
 * Pointers must be valid; `mu` must be a live handle.
 */
enum SsStatus ss_line_atom_count(const struct SsLineMeasure *mu, size_t *out);

/**
 * # Safety
 * Pointers must be valid; `mu` must be a live handle.
 */
enum SsStatus ss_line_atom(const struct SsLineMeasure *mu,
                           size_t i,
                           double *location,
                           double *mass);

/**
 * Jacobi coefficients `b_0..b_{m-1}`, `a_0..a_{m-2}` by the Lanczos
 * procedure on an `nodes`-point discretization of `mu`.
 *
 * # Safety
 * Pointers must be valid; `mu` must be a live handle.
 */
enum SsStatus ss_line_jacobi(const struct SsLineMeasure *mu,
                             size_t nodes,
                             size_t m,
                             struct SsJacobi **out);

/**
 * # Safety
 * `j` must come from this library and not be used afterwards. Null is a no-op.
 */
void ss_jacobi_free(struct SsJacobi *j);

/**
 * Number of stored `b` coefficients; there is one fewer `a`.
 *
 * # Safety
 * Pointers must be valid; `j` must be a live handle.
 */
enum SsStatus ss_jacobi_len(const struct SsJacobi *j, size_t *out);

/**
 * # Safety
 * Pointers must be valid; `j` must be a live handle.
 */
enum SsStatus ss_jacobi_b(const struct SsJacobi *j, size_t k, double *out);

/**
 * # Safety
 * Pointers must be valid; `j` must be a live handle.
 */
enum SsStatus ss_jacobi_a(const struct SsJacobi *j, size_t k, double *out);

/**
 * Gross-Witten law for `|g| <= 1`, or its Aleksandrov rotation by `phi`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum SsStatus ss_gw_law_new(double g, double phi, struct SsCircleMeasure **out);

/**
 * # Safety
 * `mu` must come from this library and not be used afterwards. Null is a no-op.
 */
void ss_circle_free(struct SsCircleMeasure *mu);

/**
 * Trigonometric moments `c_1..c_k`, written to `re[0..k]` and `im[0..k]`.
 *
 * # Safety
 * `re` and `im` must hold `k` doubles; `mu` must be a live handle.
 */
enum SsStatus ss_circle_moments(const struct SsCircleMeasure *mu, size_t k, double *re, double *im);

/**
 * Closed-form Gross-Witten Verblunsky coefficient `α_n`.
 *
 * # Safety
 * `re` and `im` must be valid for writes.
 */
enum SsStatus ss_gw_alpha(double g, size_t n, double *re, double *im);

/**
 * Schur algorithm on moments `c_1..c_len`.
 *
 * # Safety
 * `re` and `im` must hold `len` doubles; `out` must be valid for a write.
 */
enum SsStatus ss_schur_verblunsky(const double *re,
                                  const double *im,
                                  size_t len,
                                  struct SsVerblunsky **out);

/**
 * # Safety
 * `v` must come from this library and not be used afterwards. Null is a no-op.
 */
void ss_verblunsky_free(struct SsVerblunsky *v);

/**
 * # Safety
 * Pointers must be valid; `v` must be a live handle.
 */
enum SsStatus ss_verblunsky_len(const struct SsVerblunsky *v, size_t *out);

/**
 * # Safety
 * Pointers must be valid; `v` must be a live handle.
 */
enum SsStatus ss_verblunsky_get(const struct SsVerblunsky *v, size_t k, double *re, double *im);

/**
 * Spiked rate function on the line: Hermite reads `theta`, Laguerre reads
 * `tau` and `theta`.
 *
 * # Safety
 * Pointers must be valid; `mu` must be a live handle.
 */
enum SsStatus ss_rate_spiked_line(enum SsModel model,
                                  double tau,
                                  double theta,
                                  const struct SsLineMeasure *mu,
                                  double *out);

/**
 * Spiked Gross-Witten rate function.
 *
 * # Safety
 * Pointers must be valid; `mu` must be a live handle.
 */
enum SsStatus ss_rate_spiked_gw(double g,
                                double phi,
                                const struct SsCircleMeasure *mu,
                                double *out);

/**
 * Reversed relative entropy `K(reference | mu)` on the line.
 *
 * # Safety
 * Pointers must be valid; both measures must be live handles.
 */
enum SsStatus ss_reversed_kl_line(const struct SsLineMeasure *reference,
                                  const struct SsLineMeasure *mu,
                                  double *out);

/**
 * Hermite effective potential; infinite inside `(-2, 2)`.
 */
double ss_f_hermite(double x);

/**
 * Spiked ensemble replicas. Replica `i` writes `(top eigenvalue, top weight,
 * m_1)` to `out[3i..3i+3]`; `tau` is ignored for the Hermite model.
 *
 * # Safety
 * `out` must hold `3 * replicas` doubles.
 */
enum SsStatus ss_mc_spike(enum SsModel model,
                          size_t n,
                          double theta,
                          double tau,
                          uint64_t seed,
                          size_t replicas,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPIKED_SPECTRA_H */
