#ifndef IQA_H
#define IQA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; 2 to 5 match the `iqa` binary's exit codes.
 */
typedef enum IqaStatus {
  IQA_STATUS_OK = 0,
  IQA_STATUS_NULL_POINTER = 1,
  IQA_STATUS_IO = 2,
  IQA_STATUS_SHAPE = 3,
  IQA_STATUS_INVALID_PARAMETER = 4,
  IQA_STATUS_INTERNAL = 5,
} IqaStatus;

/**
 * Opaque grayscale image.
 */
typedef struct IqaImage IqaImage;

/**
 * HaarPSI settings. `subsample` and `zero_padding` are booleans (0 or 1).
 */
typedef struct IqaHaarPsiParams {
  double c;
  double alpha;
  int32_t subsample;
  int32_t zero_padding;
} IqaHaarPsiParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *iqa_last_error_message(void);

/**
 * Builds an image from `width * height` row-major 8-bit samples.
 *
 * # Safety
 * `data` must point to `width * height` readable bytes and `out` must be
 * writable.
 */
enum IqaStatus iqa_image_from_u8(const uint8_t *data,
                                 size_t width,
                                 size_t height,
                                 struct IqaImage **out);

/**
 * Builds an image from `width * height` row-major samples in `[0, 255]`.
 *
 * # Safety
 * `data` must point to `width * height` readable doubles and `out` must
 * be writable.
 */
enum IqaStatus iqa_image_from_f64(const double *data,
                                  size_t width,
                                  size_t height,
                                  struct IqaImage **out);

/**
 * Decodes a PNG/PGM/PPM file; color images are converted to grayscale.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum IqaStatus iqa_image_load(const char *path, struct IqaImage **out);

/**
 * Releases an image. NULL is ignored.
 *
 * # Safety
 * `image` must come from one of the constructors and not be freed twice.
 */
void iqa_image_free(struct IqaImage *image);

/**
 * # Safety
 * `image` must be a live handle; `width` and `height` must be writable.
 */
enum IqaStatus iqa_image_dimensions(const struct IqaImage *image, size_t *width, size_t *height);

/**
 * Fills `out` with a named preset: `default`, `med`, `cxr` or `pa`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` must be writable.
 */
enum IqaStatus iqa_haarpsi_preset(const char *name, struct IqaHaarPsiParams *out);

/**
 * HaarPSI of `distorted` against `reference`. `params` may be NULL for
 * the default preset.
 *
 * # Safety
 * Handles must be live; `params` is NULL or readable; `score` is writable.
 */
enum IqaStatus iqa_haarpsi(const struct IqaImage *reference,
                           const struct IqaImage *distorted,
                           const struct IqaHaarPsiParams *params,
                           double *score);

/**
 * PSNR in dB with peak 255; identical images give +infinity.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum IqaStatus iqa_psnr(const struct IqaImage *reference,
                        const struct IqaImage *distorted,
                        double *out);

/**
 * Mean SSIM with the standard 11x11 Gaussian window.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum IqaStatus iqa_ssim(const struct IqaImage *reference,
                        const struct IqaImage *distorted,
                        double *out);

/**
 * Spearman correlation of two length-`n` vectors.
 *
 * # Safety
 * `x` and `y` must hold `n` doubles; `out` must be writable.
 */
enum IqaStatus iqa_srcc(const double *x, const double *y, size_t n, double *out);

/**
 * Kendall tau-a of two length-`n` vectors.
 *
 * # Safety
 * `x` and `y` must hold `n` doubles; `out` must be writable.
 */
enum IqaStatus iqa_krcc(const double *x, const double *y, size_t n, double *out);

/**
 * Steiger's test for two dependent correlations sharing variable j.
 *
 * # Safety
 * `z` and `p` must be writable.
 */
enum IqaStatus iqa_steiger(double r_jk, double r_jh, double r_kh, size_t n, double *z, double *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IQA_H */
