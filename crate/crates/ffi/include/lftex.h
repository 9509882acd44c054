#ifndef LFTEX_H
#define LFTEX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LfFormat {
  LF_FORMAT_RGB8 = 0,
  LF_FORMAT_RGB_F32 = 1,
} LfFormat;

/**
 * Result code of every fallible call.
 */
typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_ARGUMENT = 1,
  LF_STATUS_INVALID_ARGUMENT = 2,
  LF_STATUS_IO = 3,
  LF_STATUS_FORMAT = 4,
  LF_STATUS_SCENE_PARSE = 5,
  LF_STATUS_DOMAIN = 6,
  LF_STATUS_PRECONDITION = 7,
  LF_STATUS_OUT_OF_BOUNDS = 8,
  LF_STATUS_SIZE_MISMATCH = 9,
  LF_STATUS_PANIC = 10,
} LfStatus;

typedef enum LfSupersample {
  LF_SUPERSAMPLE_NONE = 0,
  LF_SUPERSAMPLE_LATIN = 1,
  LF_SUPERSAMPLE_TENSOR = 2,
} LfSupersample;

typedef struct LfImage LfImage;

typedef struct LfScene LfScene;

typedef struct LfTexture LfTexture;

typedef struct LfVec3 {
  double x;
  double y;
  double z;
} LfVec3;

typedef struct LfModel {
  struct LfVec3 center;
  double radius;
} LfModel;

typedef struct LfSynthOptions {
  uint32_t dims[4];
  uint32_t supersample;
  enum LfSupersample mode;
  uint64_t seed;
  enum LfFormat format;
} LfSynthOptions;

typedef struct LfCamera {
  struct LfVec3 position;
  struct LfVec3 direction;
  /**
   * Zero vector selects +y.
   */
  struct LfVec3 up;
  /**
   * Horizontal field of view in degrees.
   */
  double fov_deg;
  uint32_t width;
  uint32_t height;
  /**
   * Nonzero for gamma 2.2 output, zero for a plain clamp.
   */
  int32_t gamma;
} LfCamera;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next `lf_*` call on the same thread.
 */
const char *lf_last_error(void);

/**
 * Library version as a NUL-terminated string.
 */
const char *lf_version(void);

enum LfStatus lf_scene_load(const char *file, struct LfScene **out);

enum LfStatus lf_scene_from_json(const char *json, struct LfScene **out);

/**
 * The scene's proxy sphere.
 */
enum LfStatus lf_scene_model(const struct LfScene *scene, struct LfModel *out);

void lf_scene_free(struct LfScene *scene);

enum LfStatus lf_texture_synthesize(const struct LfScene *scene,
                                    const struct LfSynthOptions *options,
                                    struct LfTexture **out);

enum LfStatus lf_texture_load(const char *file, struct LfTexture **out);

enum LfStatus lf_texture_save(const struct LfTexture *tex, const char *file);

/**
 * Writes U, V, S, T into `out[0..4]`.
 */
enum LfStatus lf_texture_dims(const struct LfTexture *tex, uint32_t *out);

/**
 * Reconstructs the color seen at surface point `p` from observer `o`.
 */
enum LfStatus lf_texture_sample(const struct LfTexture *tex,
                                const struct LfModel *proxy,
                                struct LfVec3 p,
                                struct LfVec3 o,
                                double *out_rgb);

void lf_texture_free(struct LfTexture *tex);

enum LfStatus lf_render_view(const struct LfTexture *tex,
                             const struct LfModel *proxy,
                             const struct LfCamera *cam,
                             struct LfImage **out);

enum LfStatus lf_render_direct(const struct LfScene *scene,
                               const struct LfCamera *cam,
                               struct LfImage **out);

enum LfStatus lf_image_load_ppm(const char *file, struct LfImage **out);

enum LfStatus lf_image_save_ppm(const struct LfImage *img, const char *file);

/**
 * Width in pixels; 0 for a null handle.
 */
uint32_t lf_image_width(const struct LfImage *img);

/**
 * Height in pixels; 0 for a null handle.
 */
uint32_t lf_image_height(const struct LfImage *img);

/**
 * Row-major RGB bytes, `3 * width * height` of them, owned by the image.
 */
const uint8_t *lf_image_pixels(const struct LfImage *img);

void lf_image_free(struct LfImage *img);

/**
 * PSNR in dB over all channels; +infinity for identical images.
 */
enum LfStatus lf_psnr(const struct LfImage *a, const struct LfImage *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LFTEX_H */
