#ifndef KERNELFORGE_H
#define KERNELFORGE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum {
  KF_STATUS_OK = 0,
  KF_STATUS_ARGUMENT = 1,
  KF_STATUS_DOMAIN = 2,
  KF_STATUS_EVALUATION = 3,
  KF_STATUS_INVARIANT_VIOLATION = 4,
  KF_STATUS_CONDITIONING = 5,
  KF_STATUS_NUMERICAL_FAILURE = 6,
  KF_STATUS_PARSE = 7,
  KF_STATUS_UNKNOWN_FAMILY = 8,
  KF_STATUS_IO = 9,
  KF_STATUS_NULL_POINTER = 10,
  KF_STATUS_PANIC = 11,
} KfStatus;

/**
 * A Gram matrix with its points.
 */
typedef struct KfGram KfGram;

/**
 * A kernel built from a JSON spec.
 */
typedef struct KfKernel KfKernel;

/**
 * A parameter measure.
 */
typedef struct KfMeasure KfMeasure;

/**
 * Error JSON of the last failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *kf_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void kf_string_free(char *s);

/**
 * `n`-node Gauss–Legendre rule on `[a, b]`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
KfStatus kf_measure_gauss_legendre(double a, double b, size_t n, KfMeasure **out);

/**
 * Atoms given row-major: `nodes` holds `n_atoms * dim` values.
 *
 * # Safety
 * `nodes` must hold `n_atoms * dim` values, `weights` `n_atoms` values, and
 * `out` must be valid for writes.
 */
KfStatus kf_measure_from_atoms(const double *nodes,
                               const double *weights,
                               size_t n_atoms,
                               size_t dim,
                               KfMeasure **out);

/**
 * Accepts the spec form (`{"gauss_legendre": {...}}`, ...) or the
 * serialized form produced by [`kf_measure_to_json`].
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` valid for writes.
 */
KfStatus kf_measure_from_json(const char *json, KfMeasure **out);

/**
 * # Safety
 * `m` must be a live measure handle and `out` valid for writes. Free the
 * result with [`kf_string_free`].
 */
KfStatus kf_measure_to_json(const KfMeasure *m, char **out);

/**
 * # Safety
 * `m` must be a live measure handle and `out` valid for writes.
 */
KfStatus kf_measure_total_mass(const KfMeasure *m, double *out);

/**
 * # Safety
 * `m` must be a live measure handle and `out` valid for writes.
 */
KfStatus kf_measure_len(const KfMeasure *m, size_t *out);

/**
 * # Safety
 * `m` must be null or a handle from this library, not yet freed.
 */
void kf_measure_free(KfMeasure *m);

/**
 * Builds a kernel from a kernel spec such as
 * `{"type": "paley_wiener", "half_bandwidth": 0.5}`.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` valid for writes.
 */
KfStatus kf_kernel_from_json(const char *json, KfKernel **out);

/**
 * # Safety
 * `k` must be a live kernel handle and `out` valid for writes.
 */
KfStatus kf_kernel_domain_dim(const KfKernel *k, size_t *out);

/**
 * `K(x, y)`; `x` and `y` hold `dim` values each.
 *
 * # Safety
 * `k` must be a live kernel handle, `x` and `y` must hold `dim` values, and
 * `re`, `im` must be valid for writes.
 */
KfStatus kf_kernel_evaluate(const KfKernel *k,
                            const double *x,
                            const double *y,
                            size_t dim,
                            double *re,
                            double *im);

/**
 * # Safety
 * `k` must be null or a handle from this library, not yet freed.
 */
void kf_kernel_free(KfKernel *k);

/**
 * Gram matrix over `n_points` points given row-major with the kernel's
 * domain dimension.
 *
 * # Safety
 * `k` must be a live kernel handle, `points` must hold
 * `n_points * domain_dim` values, and `out` must be valid for writes.
 */
KfStatus kf_gram_new(const KfKernel *k, const double *points, size_t n_points, KfGram **out);

/**
 * # Safety
 * `g` must be a live Gram handle and `out` valid for writes.
 */
KfStatus kf_gram_size(const KfGram *g, size_t *out);

/**
 * # Safety
 * `g` must be a live Gram handle and `re`, `im` valid for writes.
 */
KfStatus kf_gram_entry(const KfGram *g, size_t i, size_t j, double *re, double *im);

/**
 * Writes the PSD verdict and the smallest eigenvalue. A failed check is
 * reported through `passed`, not the status.
 *
 * # Safety
 * `g` must be a live Gram handle and `passed`, `min_eigenvalue` valid for
 * writes.
 */
KfStatus kf_gram_psd_check(const KfGram *g, bool *passed, double *min_eigenvalue);

/**
 * # Safety
 * `g` must be a live Gram handle and `out` valid for writes. Free the
 * result with [`kf_string_free`].
 */
KfStatus kf_gram_to_csv(const KfGram *g, char **out);

/**
 * # Safety
 * `g` must be null or a handle from this library, not yet freed.
 */
void kf_gram_free(KfGram *g);

/**
 * Runs a `solve-inverse` document and returns the solution JSON.
 *
 * # Safety
 * `spec` must be a nul-terminated string and `out` valid for writes. Free
 * the result with [`kf_string_free`].
 */
KfStatus kf_solve_inverse_json(const char *spec, char **out);

/**
 * Runs an `error-bound` document and returns the report JSON. A violated
 * bound gives `KfStatus::InvariantViolation` with the report in the last
 * error.
 *
 * # Safety
 * `spec` must be a nul-terminated string and `out` valid for writes. Free
 * the result with [`kf_string_free`].
 */
KfStatus kf_error_bound_json(const char *spec, char **out);

#endif  /* KERNELFORGE_H */
