#ifndef VKIT_H
#define VKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum VkitStatus {
  VKIT_STATUS_OK = 0,
  VKIT_STATUS_NULL_POINTER = 1,
  VKIT_STATUS_INVALID_ARGUMENT = 2,
  VKIT_STATUS_INVALID_METRIC = 3,
  VKIT_STATUS_INVALID_MEASURE = 4,
  VKIT_STATUS_OUT_OF_RANGE = 5,
  VKIT_STATUS_SKELETON_TOO_SHALLOW = 6,
  VKIT_STATUS_PANIC = 7,
} VkitStatus;

/**
 * Filtration type for [`vkit_complex_build`].
 */
typedef enum VkitFiltration {
  VKIT_FILTRATION_VIETORIS_RIPS = 0,
  VKIT_FILTRATION_CECH = 1,
} VkitFiltration;

/**
 * A filtered simplicial complex.
 */
typedef struct VkitComplex VkitComplex;

/**
 * A persistence diagram.
 */
typedef struct VkitDiagram VkitDiagram;

/**
 * A validated finite metric space.
 */
typedef struct VkitMetric VkitMetric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code; unknown codes map to
 * "unknown status".
 */
const char *vkit_status_string(int32_t status);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t vkit_last_error(char *buf, size_t len);

/**
 * Builds a space from a row-major `n × n` distance matrix.
 *
 * # Safety
 * `data` must point to `n * n` doubles; `out` must be writable.
 */
enum VkitStatus vkit_metric_from_matrix(const double *data, size_t n, struct VkitMetric **out);

/**
 * Builds a Euclidean space from `n` points of dimension `dim` (row-major).
 *
 * # Safety
 * `coords` must point to `n * dim` doubles; `out` must be writable.
 */
enum VkitStatus vkit_metric_from_points(const double *coords,
                                        size_t n,
                                        size_t dim,
                                        struct VkitMetric **out);

/**
 * Number of points; 0 for a null handle.
 *
 * # Safety
 * `metric` must be null or a live handle.
 */
size_t vkit_metric_len(const struct VkitMetric *metric);

/**
 * # Safety
 * `metric` must be a live handle and `out` writable.
 */
enum VkitStatus vkit_metric_dist(const struct VkitMetric *metric, size_t i, size_t j, double *out);

/**
 * # Safety
 * `metric` must be null or a handle not yet freed.
 */
void vkit_metric_free(struct VkitMetric *metric);

/**
 * Exact 1-Wasserstein distance between two measures given as
 * (support indices, weights) arrays.
 *
 * # Safety
 * Arrays must hold `len_a` / `len_b` elements; `metric` must be live and
 * `out` writable.
 */
enum VkitStatus vkit_wasserstein(const struct VkitMetric *metric,
                                 const size_t *support_a,
                                 const double *weights_a,
                                 size_t len_a,
                                 const size_t *support_b,
                                 const double *weights_b,
                                 size_t len_b,
                                 double *out);

/**
 * ℓ¹ distance between barycentric coordinate vectors.
 *
 * # Safety
 * As for [`vkit_wasserstein`], without a metric.
 */
enum VkitStatus vkit_barycentric_distance(const size_t *support_a,
                                          const double *weights_a,
                                          size_t len_a,
                                          const size_t *support_b,
                                          const double *weights_b,
                                          size_t len_b,
                                          double *out);

/**
 * Open Vietoris–Rips or intrinsic Čech complex with simplices of at most
 * `k_max + 1` vertices and values `< r` (`r` may be `INFINITY`).
 *
 * # Safety
 * `metric` must be live and `out` writable.
 */
enum VkitStatus vkit_complex_build(const struct VkitMetric *metric,
                                   enum VkitFiltration kind,
                                   double r,
                                   size_t k_max,
                                   struct VkitComplex **out);

/**
 * Number of simplices of dimension `dim`, or of all dimensions when
 * `dim == SIZE_MAX`.
 *
 * # Safety
 * `complex` must be null or live.
 */
size_t vkit_complex_count(const struct VkitComplex *complex, size_t dim);

/**
 * Betti number of the strict sublevel `{value < r}` in dimension `dim`.
 *
 * # Safety
 * `complex` must be live and `out` writable.
 */
enum VkitStatus vkit_betti_at(const struct VkitComplex *complex, double r, size_t dim, size_t *out);

/**
 * # Safety
 * `complex` must be null or a handle not yet freed.
 */
void vkit_complex_free(struct VkitComplex *complex);

/**
 * Persistence diagram in dimensions `0..=max_dim`.
 *
 * # Safety
 * `complex` must be live and `out` writable.
 */
enum VkitStatus vkit_diagram_compute(const struct VkitComplex *complex,
                                     size_t max_dim,
                                     struct VkitDiagram **out);

/**
 * Number of intervals; 0 for a null handle.
 *
 * # Safety
 * `diagram` must be null or live.
 */
size_t vkit_diagram_len(const struct VkitDiagram *diagram);

/**
 * Interval `index` in canonical order (dimension, birth, death). Essential
 * classes have `death = INFINITY`.
 *
 * # Safety
 * `diagram` must be live; out-pointers must be writable.
 */
enum VkitStatus vkit_diagram_get(const struct VkitDiagram *diagram,
                                 size_t index,
                                 size_t *dim,
                                 double *birth,
                                 double *death);

/**
 * Bottleneck distance (may be `INFINITY`).
 *
 * # Safety
 * Both diagrams must be live and `out` writable.
 */
enum VkitStatus vkit_diagram_distance(const struct VkitDiagram *a,
                                      const struct VkitDiagram *b,
                                      double *out);

/**
 * # Safety
 * `diagram` must be null or a handle not yet freed.
 */
void vkit_diagram_free(struct VkitDiagram *diagram);

/**
 * `n! · pⁿ`, the number of top simplices of the Freudenthal–Kuhn
 * triangulation of `[0,1]ⁿ` at resolution `p`.
 *
 * # Safety
 * `out` must be writable.
 */
enum VkitStatus vkit_fk_simplex_count(size_t n, size_t p, size_t *out);

/**
 * Locates `y ∈ [0,1]ⁿ`: writes the lattice base corner (`n` entries), the
 * axis order (`n` entries, 0-based) and barycentric coordinates
 * (`n + 1` entries).
 *
 * # Safety
 * `y` must hold `n` doubles; `base` and `perm` `n` writable entries;
 * `bary` `n + 1` writable entries.
 */
enum VkitStatus vkit_fk_locate(size_t n,
                               size_t p,
                               const double *y,
                               size_t *base,
                               size_t *perm,
                               double *bary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VKIT_H */
