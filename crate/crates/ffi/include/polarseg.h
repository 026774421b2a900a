#ifndef POLARSEG_H
#define POLARSEG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_ARGUMENT = 1,
  PS_STATUS_INVALID_ARGUMENT = 2,
  PS_STATUS_INVALID_CONFIG = 3,
  PS_STATUS_IO = 4,
  PS_STATUS_PARSE = 5,
  PS_STATUS_EMPTY_SCAN = 6,
  PS_STATUS_PANIC = 7,
} PsStatus;

/**
 * Values of the cell label buffer.
 */
enum PsCellLabel
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint8_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  PS_CELL_LABEL_EMPTY = 0,
  PS_CELL_LABEL_UNKNOWN = 1,
  PS_CELL_LABEL_GROUND = 2,
  PS_CELL_LABEL_NOISY_GROUND = 3,
  PS_CELL_LABEL_OBJECT = 4,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum PsCellLabel PsCellLabel;
#else
typedef uint8_t PsCellLabel;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

typedef struct PsConfig PsConfig;

typedef struct PsResult PsResult;

/**
 * Per-stage wall-clock time of one run, milliseconds.
 */
typedef struct PsTimings {
  double pgm_ms;
  double ugl_ms;
  double ege_ms;
  double pgs_ms;
  double total_ms;
} PsTimings;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *ps_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ps_version(void);

/**
 * HDL-64E defaults. Never NULL.
 */
struct PsConfig *ps_config_default(void);

/**
 * Load a TOML config file. On success `*out` owns a new handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PsStatus ps_config_load(const char *path, struct PsConfig **out);

/**
 * Parse config text in the file format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PsStatus ps_config_parse(const char *text, struct PsConfig **out);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards. NULL is
 * ignored.
 */
void ps_config_free(struct PsConfig *config);

/**
 * Segment `n` points. Point `k` is `xyz[k * stride .. k * stride + 3]`, so
 * KITTI x/y/z/intensity buffers use `stride = 4`.
 *
 * # Safety
 * `xyz` must hold at least `(n - 1) * stride + 3` floats; `out` must be a
 * writable pointer.
 */
enum PsStatus ps_segment(const struct PsConfig *config,
                         const float *xyz,
                         size_t n,
                         size_t stride,
                         struct PsResult **out);

/**
 * # Safety
 * `result` must come from `ps_segment` and not be used afterwards. NULL is
 * ignored.
 */
void ps_result_free(struct PsResult *result);

/**
 * Number of points; 0 for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t ps_result_len(const struct PsResult *result);

/**
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t ps_result_num_ground(const struct PsResult *result);

/**
 * Per-point flags in input order, 1 = ground. Owned by `result`.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
const uint8_t *ps_result_ground(const struct PsResult *result);

/**
 * Per-point interpolated ground height; NaN where none was estimated.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
const double *ps_result_elevations(const struct PsResult *result);

/**
 * Final cell labels ([`PsCellLabel`] values), segment-major: cell `(i, j)`
 * is at `i * num_cells + j`. Grid dimensions are written when the out
 * pointers are non-NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle; the out pointers NULL or writable.
 */
const uint8_t *ps_result_cell_labels(const struct PsResult *result,
                                     size_t *num_segments,
                                     size_t *num_cells);

/**
 * # Safety
 * `result` must be NULL or a live handle and `out` NULL or writable.
 */
enum PsStatus ps_result_timings(const struct PsResult *result, struct PsTimings *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLARSEG_H */
