#ifndef SEMICLAB_H
#define SEMICLAB_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Observable quantization selector.
 */
typedef enum SemiclabQuantization {
  SEMICLAB_QUANTIZATION_WEYL = 0,
  SEMICLAB_QUANTIZATION_ANTI_WICK = 1,
} SemiclabQuantization;

/**
 * Result codes shared by every entry point.
 */
typedef enum SemiclabStatus {
  SEMICLAB_STATUS_OK = 0,
  SEMICLAB_STATUS_HYPOTHESIS = 2,
  SEMICLAB_STATUS_NUMERICAL = 3,
  SEMICLAB_STATUS_CONFIG = 4,
  SEMICLAB_STATUS_NULL_POINTER = 10,
  SEMICLAB_STATUS_INDEX = 11,
  SEMICLAB_STATUS_PANIC = 12,
} SemiclabStatus;

/**
 * A symbol: Schrödinger, radial or phase polynomial.
 */
typedef struct SemiclabModel SemiclabModel;

/**
 * A parsed phase-space observable.
 */
typedef struct SemiclabObservable SemiclabObservable;

/**
 * Eigenpairs in one energy window.
 */
typedef struct SemiclabWindow SemiclabWindow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *semiclab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *semiclab_version(void);

/**
 * Build a model from a catalog name or an inline `poly1d:`, `radial:` or `phase:` spec.
 *
 * # Safety
 * `spec` must be NUL-terminated; `out` must be writable.
 */
enum SemiclabStatus semiclab_model_new(const char *spec, struct SemiclabModel **out);

/**
 * # Safety
 * `model` must come from [`semiclab_model_new`] or be null.
 */
void semiclab_model_free(struct SemiclabModel *model);

/**
 * Phase-space dimension `n` (1 for line models, 2 for radial ones).
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum SemiclabStatus semiclab_model_dimension(const struct SemiclabModel *model, uint32_t *out);

/**
 * Critical energy a catalog model is meant to be probed at.
 *
 * # Safety
 * `name` must be NUL-terminated; `out` must be writable.
 */
enum SemiclabStatus semiclab_catalog_critical_energy(const char *name, double *out);

/**
 * Parse an observable such as `exp(-x^2-xi^2)`.
 *
 * # Safety
 * `expr` must be NUL-terminated; `out` must be writable.
 */
enum SemiclabStatus semiclab_observable_parse(const char *expr, struct SemiclabObservable **out);

/**
 * # Safety
 * `obs` must come from [`semiclab_observable_parse`] or be null.
 */
void semiclab_observable_free(struct SemiclabObservable *obs);

/**
 * Eigenpairs with eigenvalues in `[center - d h, center + d h]`, default solver settings.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum SemiclabStatus semiclab_window_solve(const struct SemiclabModel *model,
                                          double center,
                                          double d,
                                          double h,
                                          struct SemiclabWindow **out);

/**
 * # Safety
 * `window` must come from [`semiclab_window_solve`] or be null.
 */
void semiclab_window_free(struct SemiclabWindow *window);

/**
 * Number of eigenpairs stored in the window.
 *
 * # Safety
 * `window` must be a live handle; `out` must be writable.
 */
enum SemiclabStatus semiclab_window_len(const struct SemiclabWindow *window, size_t *out);

/**
 * Multiplicity-weighted eigenvalue count.
 *
 * # Safety
 * `window` must be a live handle; `out` must be writable.
 */
enum SemiclabStatus semiclab_window_count(const struct SemiclabWindow *window, uint64_t *out);

/**
 * Eigenvalue and multiplicity weight of pair `index`.
 *
 * # Safety
 * `window` must be a live handle; `value` and `weight` must be writable.
 */
enum SemiclabStatus semiclab_window_eigenvalue(const struct SemiclabWindow *window,
                                               size_t index,
                                               double *value,
                                               uint32_t *weight);

/**
 * `nu_j(a)` for every pair, written to `values[0..len]`; NaN where the
 * quantization has no value. `capacity` must be at least the window length.
 *
 * # Safety
 * Handles must be live; `values` must hold `capacity` doubles; `written` must be writable.
 */
enum SemiclabStatus semiclab_window_measure(const struct SemiclabWindow *window,
                                            const struct SemiclabObservable *obs,
                                            enum SemiclabQuantization quantization,
                                            double *values,
                                            size_t capacity,
                                            size_t *written);

/**
 * Normalized Liouville average of `obs` on the level `energy`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SemiclabStatus semiclab_liouville_average(const struct SemiclabModel *model,
                                               const struct SemiclabObservable *obs,
                                               double energy,
                                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMICLAB_H */
