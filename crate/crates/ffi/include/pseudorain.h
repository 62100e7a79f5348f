#ifndef PSEUDORAIN_H
#define PSEUDORAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PrStatus {
  PR_STATUS_OK = 0,
  PR_STATUS_NULL_POINTER = 1,
  PR_STATUS_INVALID_ARGUMENT = 2,
  PR_STATUS_IO = 3,
  PR_STATUS_DECODE = 4,
  PR_STATUS_DIMENSION_MISMATCH = 5,
  PR_STATUS_BUFFER_TOO_SMALL = 6,
  PR_STATUS_CONFIG = 7,
  PR_STATUS_PANIC = 8,
} PrStatus;

/**
 * Opaque image handle.
 */
typedef struct PrImage PrImage;

typedef struct PrMatch {
  size_t y;
  size_t x;
  double mse;
} PrMatch;

typedef struct PrFusionParams {
  double alpha;
  double mask_keep_frac;
  double min_patch_frac;
  size_t stride;
} PrFusionParams;

/**
 * Window a patch was fused into; `fallback` is 1 when the patch was rescaled.
 */
typedef struct PrFusionWindow {
  size_t top;
  size_t left;
  size_t height;
  size_t width;
  double mse;
  uint8_t fallback;
} PrFusionWindow;

typedef struct PrScores {
  double charbonnier;
  double fft_loss;
  double edge_loss;
  double total;
  double psnr_db;
  double ssim;
} PrScores;

typedef struct PrPipelineSummary {
  size_t samples;
  size_t failures;
} PrPipelineSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pr_version(void);

/**
 * Copies the last error message on this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t pr_last_error_message(char *buf, size_t len);

/**
 * Creates an image from `height * width * channels` interleaved samples in
 * `[0, 1]`. `channels` is 1 or 3.
 *
 * # Safety
 * `data` must be valid for `height * width * channels` reads; `out` must be writable.
 */
enum PrStatus pr_image_new(size_t height,
                           size_t width,
                           size_t channels,
                           const double *data,
                           struct PrImage **out);

/**
 * Decodes a PNG or JPEG file into a 3-channel image.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PrStatus pr_image_load(const char *path, struct PrImage **out);

/**
 * Writes `img` as 8-bit PNG.
 *
 * # Safety
 * `img` must be a live handle; `path` a NUL-terminated string.
 */
enum PrStatus pr_image_save(const struct PrImage *img, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `img` must be null or a handle not yet freed.
 */
void pr_image_free(struct PrImage *img);

/**
 * # Safety
 * `img` must be a live handle; each out pointer may be null.
 */
enum PrStatus pr_image_dims(const struct PrImage *img,
                            size_t *height,
                            size_t *width,
                            size_t *channels);

/**
 * Copies the interleaved samples into `buf`, which must hold at least
 * `height * width * channels` values.
 *
 * # Safety
 * `img` must be a live handle; `buf` valid for `len` writes.
 */
enum PrStatus pr_image_copy_data(const struct PrImage *img, double *buf, size_t len);

/**
 * SLIC superpixels. Writes one label per pixel in row-major order into
 * `labels` (length at least `height * width`) and the region count into
 * `regions`.
 *
 * # Safety
 * `img` must be a live handle; `labels` valid for `len` writes; `regions` writable or null.
 */
enum PrStatus pr_slic_segment(const struct PrImage *img,
                              size_t k,
                              double compactness,
                              uint32_t *labels,
                              size_t len,
                              size_t *regions);

/**
 * Best MSE placement of `needle` inside `haystack`.
 *
 * # Safety
 * Both handles must be live; `out` writable.
 */
enum PrStatus pr_match_region(const struct PrImage *haystack,
                              const struct PrImage *needle,
                              size_t stride,
                              struct PrMatch *out);

struct PrFusionParams pr_fusion_params_default(void);

/**
 * Blends the whole of `patch` into `target`, rescaling it when it fails the
 * size gate. `window` may be null.
 *
 * # Safety
 * Handles must be live; `out` writable; `window` writable or null.
 */
enum PrStatus pr_fuse_patch(const struct PrImage *target,
                            const struct PrImage *patch,
                            struct PrFusionParams params,
                            uint64_t seed,
                            struct PrImage **out,
                            struct PrFusionWindow *window);

/**
 * Rain with default synthesis ranges, drawn under `seed`.
 *
 * # Safety
 * `clean` must be a live 3-channel handle; `out` writable.
 */
enum PrStatus pr_synthesize_rain(const struct PrImage *clean, uint64_t seed, struct PrImage **out);

/**
 * Losses and quality metrics of `pred` against `gt` with unit loss weights.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum PrStatus pr_score(const struct PrImage *pred, const struct PrImage *gt, struct PrScores *out);

/**
 * Runs the full synthesis pipeline described by a TOML config file.
 * Per-sample failures are counted in `summary`, not reported as errors.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `summary` writable or null.
 */
enum PrStatus pr_run_pipeline(const char *config_path, struct PrPipelineSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSEUDORAIN_H */
