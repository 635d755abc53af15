#ifndef ANCHOR_AUG_H
#define ANCHOR_AUG_H

/* Generated by cbindgen from anchor-aug-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum AdaStatus {
  ADA_STATUS_OK = 0,
  ADA_STATUS_NULL_POINTER = 1,
  ADA_STATUS_INVALID_ARGUMENT = 2,
  ADA_STATUS_DIMENSION_MISMATCH = 3,
  ADA_STATUS_SINGULAR_TRANSFORM = 4,
  ADA_STATUS_INTERNAL_ERROR = 5,
} AdaStatus;

// A per-sample partition into q anchor groups.
typedef struct AdaAssignment AdaAssignment;

// A dataset handle: an n x d feature matrix with its n targets.
typedef struct AdaDataset AdaDataset;

// Deterministic random generator handle for the minibatch API.
typedef struct AdaRng AdaRng;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on this thread. The pointer stays valid
// until the next failing call on the same thread.
const char *ada_last_error_message(void);

// Creates a dataset from a row-major `n x d` feature buffer and `n` targets.
//
// # Safety
// `x` must point to `n * d` readable doubles, `y` to `n`, and `out` must be
// a valid location to store the handle. Free with [`ada_dataset_free`].
enum AdaStatus ada_dataset_new(const double *x,
                               size_t n,
                               size_t d,
                               const double *y,
                               struct AdaDataset **out);

// # Safety
// `ds` must be null or a handle from [`ada_dataset_new`], not yet freed.
void ada_dataset_free(struct AdaDataset *ds);

// # Safety
// `ds` must be a valid dataset handle.
size_t ada_dataset_rows(const struct AdaDataset *ds);

// # Safety
// `ds` must be a valid dataset handle.
size_t ada_dataset_cols(const struct AdaDataset *ds);

// Creates an assignment from `n` labels in `[0, q)`.
//
// # Safety
// `labels` must point to `n` readable values; `out` must be writable. Free
// with [`ada_assignment_free`].
enum AdaStatus ada_assignment_new(const size_t *labels,
                                  size_t n,
                                  size_t q,
                                  struct AdaAssignment **out);

// # Safety
// `a` must be null or an assignment handle, not yet freed.
void ada_assignment_free(struct AdaAssignment *a);

// # Safety
// `a` must be a valid assignment handle.
size_t ada_assignment_len(const struct AdaAssignment *a);

// # Safety
// `a` must be a valid assignment handle.
size_t ada_assignment_groups(const struct AdaAssignment *a);

// Copies the labels into a caller buffer of length `len` (must equal the
// assignment length).
//
// # Safety
// `a` must be a valid assignment handle and `out` writable for `len` values.
enum AdaStatus ada_assignment_labels(const struct AdaAssignment *a, size_t *out, size_t len);

// Clusters the dataset features into `q` groups with seeded k-means
// (k-means++ init, 10 restarts) and returns the assignment.
//
// # Safety
// `ds` must be a valid dataset handle; `out` must be writable.
enum AdaStatus ada_kmeans(const struct AdaDataset *ds,
                          size_t q,
                          uint64_t seed,
                          struct AdaAssignment **out);

// Creates a seeded generator for [`ada_minibatch`].
struct AdaRng *ada_rng_new(uint64_t seed);

// # Safety
// `rng` must be null or a handle from [`ada_rng_new`], not yet freed.
void ada_rng_free(struct AdaRng *rng);

// Applies the scaled anchor transform for one gamma. `out_x` receives the
// transformed features (row major, `n * d`), `out_y` the `n` targets.
//
// # Safety
// `ds` and `assignment` must be valid handles with matching row counts;
// `out_x`/`out_y` must be writable for `n * d` / `n` doubles.
enum AdaStatus ada_transform_apply(const struct AdaDataset *ds,
                                   const struct AdaAssignment *assignment,
                                   double gamma,
                                   double *out_x,
                                   double *out_y);

// Rows produced by [`ada_augment_offline`] for a dataset of `n` samples and
// `n_aug` augmentations per sample.
size_t ada_augment_rows(size_t n, size_t n_aug);

// Offline augmentation over the symmetric gamma grid for `alpha` with
// `n_aug` values (even, >= 2). Output buffers must hold
// `ada_augment_rows(n, n_aug) * d` and `ada_augment_rows(n, n_aug)` doubles.
//
// # Safety
// `ds` and `assignment` must be valid handles with matching row counts;
// output buffers must be writable at the documented sizes.
enum AdaStatus ada_augment_offline(const struct AdaDataset *ds,
                                   const struct AdaAssignment *assignment,
                                   double alpha,
                                   size_t n_aug,
                                   double *out_x,
                                   double *out_y);

// One augmented minibatch: draws gamma uniformly from `[1/alpha, alpha]`
// using the generator handle and applies the scaled transform to the whole
// dataset handle (callers pass the batch as the dataset). The drawn gamma is
// written to `out_gamma`.
//
// # Safety
// All handles must be valid; `out_x`/`out_y`/`out_gamma` must be writable
// for `n * d`, `n` and 1 doubles respectively.
enum AdaStatus ada_minibatch_apply(const struct AdaDataset *ds,
                                   const struct AdaAssignment *assignment,
                                   double alpha,
                                   struct AdaRng *rng,
                                   double *out_x,
                                   double *out_y,
                                   double *out_gamma);

// Closed-form anchor regression on the dataset for the given partition and
// gamma. Writes `d` coefficients and the intercept.
//
// # Safety
// Handles must be valid; `out_coef` must be writable for `d` doubles and
// `out_intercept` for one.
enum AdaStatus ada_fit_anchor_regression(const struct AdaDataset *ds,
                                         const struct AdaAssignment *assignment,
                                         double gamma,
                                         double *out_coef,
                                         double *out_intercept);

// Runs a benchmark experiment from a TOML config file and writes the
// results JSON to `out_path`. Paths are NUL-terminated UTF-8.
//
// # Safety
// `config_path` and `out_path` must be valid NUL-terminated strings.
enum AdaStatus ada_run_experiment_file(const char *config_path,
                                       const char *out_path,
                                       size_t threads);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANCHOR_AUG_H */
