#ifndef GEOSTORY_H
#define GEOSTORY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_ARGUMENT = 1,
  GS_STATUS_INVALID_UTF8 = 2,
  // Parse or validation failure; see `gs_last_error`.
  GS_STATUS_INVALID_INPUT = 3,
  // Target resolution, planning or scheduling failure.
  GS_STATUS_COMPILE_FAILED = 4,
  GS_STATUS_BUFFER_TOO_SMALL = 5,
  GS_STATUS_OUT_OF_RANGE = 6,
  GS_STATUS_PANIC = 7,
} GsStatus;

// A compiled story: canonical script bytes and the storyboard.
typedef struct GsScript GsScript;

// A parsed story plus the dataset texts added so far.
typedef struct GsStory GsStory;

// Camera state with angles in degrees.
typedef struct {
  double lon;
  double lat;
  double zoom;
  double pitch;
  double bearing;
  double fov;
} GsCameraState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *gs_last_error(void);

// Library version as a static NUL-terminated string.
const char *gs_version(void);

// Parses and validates a story document.
//
// # Safety
// `json` must be a NUL-terminated string; `out_story` must be writable.
GsStatus gs_story_parse(const char *json, GsStory **out_story);

// Supplies the text of dataset `id`, replacing any earlier text.
//
// # Safety
// `story` must come from `gs_story_parse`; strings must be NUL-terminated.
GsStatus gs_story_add_dataset(GsStory *story, const char *id, const char *data);

// # Safety
// `story` must come from `gs_story_parse` and not be used afterwards. Null
// is ignored.
void gs_story_free(GsStory *story);

// Compiles a story with the builtin default-shot table.
//
// # Safety
// `story` must be a live handle; `out_script` must be writable.
GsStatus gs_story_compile(const GsStory *story, GsScript **out_script);

// # Safety
// `script` must come from `gs_story_compile` and not be used afterwards.
// Null is ignored.
void gs_script_free(GsScript *script);

// Canonical script JSON. The bytes are owned by the handle and are not
// NUL-terminated.
//
// # Safety
// `script` must be a live handle; `data` and `len` must be writable.
GsStatus gs_script_json(const GsScript *script, const uint8_t **data, uintptr_t *len);

// SVG storyboard bytes, owned by the handle.
//
// # Safety
// As for `gs_script_json`.
GsStatus gs_script_storyboard(const GsScript *script, const uint8_t **data, uintptr_t *len);

// # Safety
// `script` must be a live handle; `seconds` must be writable.
GsStatus gs_script_duration(const GsScript *script, double *seconds);

// Number of tracks (1, or 2 when a scene uses a split layout).
//
// # Safety
// `script` must be a live handle; `count` must be writable.
GsStatus gs_script_track_count(const GsScript *script, uintptr_t *count);

// # Safety
// `script` must be a live handle; `count` must be writable.
GsStatus gs_script_frame_count(const GsScript *script, uintptr_t track, uintptr_t *count);

// Camera state of one frame; `time` receives the frame time in seconds.
//
// # Safety
// `script` must be a live handle; `state` and `time` must be writable.
GsStatus gs_script_frame(const GsScript *script,
                         uintptr_t track,
                         uintptr_t index,
                         GsCameraState *state,
                         double *time);

// Degrees to normalized Web Mercator in [0, 1]², y pointing south.
//
// # Safety
// `x` and `y` must be writable.
GsStatus gs_project(double lon, double lat, double *x, double *y);

// # Safety
// `lon` and `lat` must be writable.
GsStatus gs_unproject(double x, double y, double *lon, double *lat);

// Camera framing the box with `margin` of each viewport side left free.
//
// # Safety
// `state` must be writable.
GsStatus gs_fit_bounds(double west,
                       double south,
                       double east,
                       double north,
                       uint32_t width,
                       uint32_t height,
                       double margin,
                       double pitch,
                       double bearing,
                       GsCameraState *state);

// Writes the default shot name for a purpose and target kind into `buf`
// as a NUL-terminated string.
//
// # Safety
// Strings must be NUL-terminated; `buf` must hold `buf_len` bytes.
GsStatus gs_default_shot(const char *purpose,
                         const char *target_kind,
                         char *buf,
                         uintptr_t buf_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEOSTORY_H */
