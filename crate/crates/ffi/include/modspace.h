#ifndef MODSPACE_H
#define MODSPACE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_INVALID_ARGUMENT = 1,
  MS_STATUS_NULL_POINTER = 2,
  MS_STATUS_NUMERICAL = 3,
  MS_STATUS_IO = 4,
  MS_STATUS_ASSERTION = 5,
  MS_STATUS_PANIC = 6,
} MsStatus;

// Opaque phase-space field produced by [`ms_stft`].
typedef struct MsField MsField;

// Opaque sampled function on a uniform grid.
typedef struct MsGridFunction MsGridFunction;

// Opaque weight handle.
typedef struct MsWeight MsWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *ms_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void ms_string_free(char *s);

// Library version as a static string.
const char *ms_version(void);

// Builds a weight from its JSON descriptor.
//
// # Safety
// `json` must be a nul-terminated string; `out` a writable pointer.
enum MsStatus ms_weight_from_json(const char *json, struct MsWeight **out);

// Phase-space dimension `2d` of the weight.
//
// # Safety
// `w` must be a live handle or null.
enum MsStatus ms_weight_dim(const struct MsWeight *w, size_t *out);

// Evaluates the weight at the point `x[0..len]`.
//
// # Safety
// `x` must point to `len` doubles.
enum MsStatus ms_weight_eval(const struct MsWeight *w, const double *x, size_t len, double *out);

// Descriptor JSON of the weight.
//
// # Safety
// `w` must be a live handle; `out` a writable pointer.
enum MsStatus ms_weight_to_json(const struct MsWeight *w, char **out);

// # Safety
// `w` must come from this library and not be freed twice.
void ms_weight_free(struct MsWeight *w);

// The normalized Gaussian on the cube `[-extent, extent]^dim`.
//
// # Safety
// `out` must be writable.
enum MsStatus ms_grid_function_gaussian(size_t dim,
                                        double step,
                                        double extent,
                                        struct MsGridFunction **out);

// The Hermite function `h_alpha`, `alpha` of length `dim`.
//
// # Safety
// `alpha` must point to `dim` entries; `out` must be writable.
enum MsStatus ms_grid_function_hermite(const size_t *alpha,
                                       size_t dim,
                                       double step,
                                       double extent,
                                       struct MsGridFunction **out);

// A function from interleaved `(re, im)` samples in row-major order;
// `len` counts doubles.
//
// # Safety
// `samples` must point to `len` doubles; `out` must be writable.
enum MsStatus ms_grid_function_from_samples(size_t dim,
                                            double step,
                                            double extent,
                                            const double *samples,
                                            size_t len,
                                            struct MsGridFunction **out);

// Number of grid points.
//
// # Safety
// `f` must be a live handle; `out` writable.
enum MsStatus ms_grid_function_len(const struct MsGridFunction *f, size_t *out);

// Copies interleaved `(re, im)` samples into `buf`, which holds `cap`
// doubles and must fit `2 * len`.
//
// # Safety
// `buf` must be writable for `cap` doubles.
enum MsStatus ms_grid_function_samples(const struct MsGridFunction *f, double *buf, size_t cap);

// `L²` norm of the sampled function.
//
// # Safety
// `f` must be a live handle; `out` writable.
enum MsStatus ms_grid_function_l2_norm(const struct MsGridFunction *f, double *out);

// Reads a function from the binary grid format.
//
// # Safety
// `path` must be nul-terminated; `out` writable.
enum MsStatus ms_grid_function_read(const char *path, struct MsGridFunction **out);

// Writes a function in the binary grid format.
//
// # Safety
// `f` must be a live handle; `path` nul-terminated.
enum MsStatus ms_grid_function_write(const struct MsGridFunction *f, const char *path);

// # Safety
// `f` must come from this library and not be freed twice.
void ms_grid_function_free(struct MsGridFunction *f);

// STFT of `f` on the FFT-dual phase grid with x-stride `x_stride` and
// frequency extent `xi_extent`. A null `window` selects the Gaussian.
//
// # Safety
// Handles must be live or null as documented; `out` writable.
enum MsStatus ms_stft(const struct MsGridFunction *f,
                      const struct MsGridFunction *window,
                      size_t x_stride,
                      double xi_extent,
                      struct MsField **out);

// Number of phase-space samples.
//
// # Safety
// `v` must be a live handle; `out` writable.
enum MsStatus ms_field_len(const struct MsField *v, size_t *out);

// Copies interleaved `(re, im)` samples, row-major with x axes first.
//
// # Safety
// `buf` must be writable for `cap` doubles.
enum MsStatus ms_field_samples(const struct MsField *v, double *buf, size_t cap);

// Sampled sup norm of the field.
//
// # Safety
// `v` must be a live handle; `out` writable.
enum MsStatus ms_field_sup_norm(const struct MsField *v, double *out);

// Writes the field in the binary phase-field format.
//
// # Safety
// `v` must be a live handle; `path` nul-terminated.
enum MsStatus ms_field_write(const struct MsField *v, const char *path);

// # Safety
// `v` must come from this library and not be freed twice.
void ms_field_free(struct MsField *v);

// Weighted `L^{p,q}` modulation norm (x innermost). Infinite exponents
// are passed as `INFINITY`; a null `window` selects the Gaussian.
//
// # Safety
// Handles must be live or null as documented; `out` writable.
enum MsStatus ms_modulation_norm(const struct MsGridFunction *f,
                                 const struct MsGridFunction *window,
                                 const struct MsWeight *weight,
                                 double p,
                                 double q,
                                 size_t x_stride,
                                 double xi_extent,
                                 double *out);

// Full embedding analysis of `M(omega1) -> M(omega2)`; the report is
// returned as JSON. `options_json` may be null for defaults.
//
// # Safety
// Handles must be live; `options_json` nul-terminated or null; `out`
// writable.
enum MsStatus ms_embedding_analyze(const struct MsWeight *omega1,
                                   const struct MsWeight *omega2,
                                   const char *options_json,
                                   char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODSPACE_H */
