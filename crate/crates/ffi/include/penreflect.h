#ifndef PENREFLECT_H
#define PENREFLECT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PrStatus {
  PR_STATUS_OK = 0,
  PR_STATUS_INVALID_ARGUMENT = 1,
  PR_STATUS_DOMAIN = 2,
  PR_STATUS_INTEGRATION = 3,
  PR_STATUS_NUMERIC = 4,
  PR_STATUS_UNSUPPORTED = 5,
  PR_STATUS_IO = 6,
  PR_STATUS_NULL_POINTER = 7,
  PR_STATUS_BUFFER_TOO_SMALL = 8,
  PR_STATUS_PANIC = 9,
} PrStatus;

typedef enum PrSeries {
  PR_SERIES_TIMES = 0,
  /**
   * Row-major node coordinates, len × ambient values.
   */
  PR_SERIES_POINTS = 1,
  PR_SERIES_BOUNDARY_DISTANCE = 2,
  PR_SERIES_LOCAL_TIME = 3,
} PrSeries;

/**
 * Opaque manifold model.
 */
typedef struct PrModel PrModel;

/**
 * Opaque simulated path: node coordinates, boundary distance, local time.
 */
typedef struct PrPath PrPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call on the same thread.
 */
const char *pr_last_error_message(void);

/**
 * Parse a model spec such as `"cap:theta0=1"` into a new handle.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum PrStatus pr_model_parse(const char *spec, struct PrModel **out);

/**
 * # Safety
 * `model` must come from [`pr_model_parse`] (or be NULL) and not be used afterwards.
 */
void pr_model_free(struct PrModel *model);

/**
 * Intrinsic and ambient dimension.
 *
 * # Safety
 * `model` must be a live handle; the outputs must be writable.
 */
enum PrStatus pr_model_dims(const struct PrModel *model, size_t *dim, size_t *ambient);

/**
 * R(x), the distance to the boundary.
 *
 * # Safety
 * `x` must point to `len` doubles; `out` must be writable.
 */
enum PrStatus pr_boundary_distance(const struct PrModel *model,
                                   const double *x,
                                   size_t len,
                                   double *out);

/**
 * Skorohod map of a piecewise-linear driver on the half-line. The driver
 * has `n` nodes; both outputs receive `n` values.
 *
 * # Safety
 * `times` and `values` must point to `n` doubles; the outputs must hold `n` doubles.
 */
enum PrStatus pr_skorohod_map(double x,
                              const double *times,
                              const double *values,
                              size_t n,
                              double *reflected,
                              double *local_time);

/**
 * Simulate one path from `x0` on `steps` uniform steps up to `horizon`.
 * `a > 0` gives the penalized path (local time L^a); `a <= 0` the
 * reflected one. The driver is fixed by `seed`.
 *
 * # Safety
 * `x0` must point to `len` doubles; `out` must be writable.
 */
enum PrStatus pr_simulate(const struct PrModel *model,
                          const double *x0,
                          size_t len,
                          double horizon,
                          size_t steps,
                          uint64_t seed,
                          double a,
                          struct PrPath **out);

/**
 * Number of nodes (steps + 1); 0 for NULL.
 *
 * # Safety
 * `path` must be a live handle or NULL.
 */
size_t pr_path_len(const struct PrPath *path);

/**
 * Ambient coordinates per node; 0 for NULL.
 *
 * # Safety
 * `path` must be a live handle or NULL.
 */
size_t pr_path_ambient(const struct PrPath *path);

/**
 * Copy one series of the path into `buf` (capacity `cap` doubles).
 *
 * # Safety
 * `path` must be a live handle; `buf` must hold `cap` doubles.
 */
enum PrStatus pr_path_copy(const struct PrPath *path,
                           enum PrSeries series,
                           double *buf,
                           size_t cap);

/**
 * # Safety
 * `path` must come from [`pr_simulate`] (or be NULL) and not be used afterwards.
 */
void pr_path_free(struct PrPath *path);

/**
 * Monte Carlo estimate of E f(Y_T) for the reflected motion from `x`, with
 * `field` one of the built-in profiles ("gauss", "cos-neumann", "const").
 *
 * # Safety
 * `field` must be NUL-terminated, `x` must point to `len` doubles, the outputs must be writable.
 */
enum PrStatus pr_neumann_heat_mc(const struct PrModel *model,
                                 const char *field,
                                 const double *x,
                                 size_t len,
                                 double horizon,
                                 double dt,
                                 size_t n_paths,
                                 uint64_t seed,
                                 double *mean,
                                 double *stderr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PENREFLECT_H */
