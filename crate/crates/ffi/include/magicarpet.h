#ifndef MAGICARPET_H
#define MAGICARPET_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define MG_TILE_COUNT 12

/**
 * Status returned by every fallible entry point.
 */
typedef enum MgErrorCode {
  MG_ERROR_CODE_OK = 0,
  MG_ERROR_CODE_NULL_POINTER = 1,
  MG_ERROR_CODE_INVALID_UTF8 = 2,
  MG_ERROR_CODE_INVALID_TILE = 3,
  MG_ERROR_CODE_INVALID_CONFIG = 4,
  MG_ERROR_CODE_TIME_REGRESSION = 5,
  MG_ERROR_CODE_SESSION_ENDED = 6,
  MG_ERROR_CODE_MALFORMED = 7,
  MG_ERROR_CODE_UNDEFINED_DENOMINATOR = 8,
  MG_ERROR_CODE_WRONG_MODE = 9,
  MG_ERROR_CODE_CORRUPT = 10,
  MG_ERROR_CODE_IO = 11,
  MG_ERROR_CODE_BUFFER_TOO_SMALL = 12,
  MG_ERROR_CODE_PANIC = 99,
} MgErrorCode;

typedef enum MgBand {
  MG_BAND_POORER = 0,
  MG_BAND_NORMAL = 1,
  MG_BAND_BETTER = 2,
} MgBand;

typedef enum MgItemCode {
  MG_ITEM_CODE_COMPLETED = 0,
  MG_ITEM_CODE_NOT_COMPLETED = 1,
  MG_ITEM_CODE_NOT_PERFORMED_REVERSE_OR_OVER_REPEATED = 2,
  MG_ITEM_CODE_REVERSE_SIDE_PERFORMED = 3,
  MG_ITEM_CODE_CORRECT_BUT_OVER_REPEATED = 4,
} MgItemCode;

typedef enum MgMode {
  MG_MODE_IMITATION = 0,
  MG_MODE_COLLABORATION = 1,
} MgMode;

/**
 * Opaque session handle.
 */
typedef struct MgSession MgSession;

typedef struct MgTileVisual {
  uint8_t r;
  uint8_t g;
  uint8_t b;
  bool lit;
  bool flashing;
} MgTileVisual;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a pointer previously returned by this library and
 * not yet freed.
 */
void mg_string_free(char *s);

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *mg_version(void);

/**
 * Message for the most recent failure on this thread, or null. Free with
 * `mg_string_free`.
 */
char *mg_last_error_message(void);

/**
 * Band for a HOC value. Fails on NaN.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum MgErrorCode mg_classify(double hoc_c, enum MgBand *out);

/**
 * Signed value of one item code under the default scheme.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum MgErrorCode mg_item_score(enum MgItemCode code, double *out);

/**
 * `S_cm` for one movement type's item list under the default scheme.
 * `repetition` may be null, meaning no item is a repetition.
 *
 * # Safety
 * `codes` must be valid for `len` reads, and `repetition` too when non-null;
 * `out` must be valid for a write.
 */
enum MgErrorCode mg_score_items(const enum MgItemCode *codes,
                                const bool *repetition,
                                size_t len,
                                double *out);

/**
 * Score a session log file and return the report as a JSON object.
 * `scheme_json` may be null for the default scheme.
 *
 * # Safety
 * `path` and non-null `scheme_json` must be NUL-terminated strings; `out`
 * must be valid for writing a string pointer, which the caller frees with
 * `mg_string_free`.
 */
enum MgErrorCode mg_score_log(const char *path, const char *scheme_json, char **out);

/**
 * Create a session with default timers and light count.
 *
 * # Safety
 * `out` must be valid for writing a handle pointer.
 */
enum MgErrorCode mg_session_new(enum MgMode mode, uint64_t seed, struct MgSession **out);

/**
 * Create a session from a JSON object with `start` fields
 * (`mode`, `seed`, `collab_lights_n`, `idle_flash_ms`, ...). A leading
 * `"t":"start"` tag is accepted.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be valid for
 * writing a handle pointer.
 */
enum MgErrorCode mg_session_new_json(const char *config_json, struct MgSession **out);

/**
 * # Safety
 * `session` must be null or a live handle from `mg_session_new*`.
 */
enum MgErrorCode mg_session_press(struct MgSession *session, uint32_t tile_index, uint64_t t_ms);

/**
 * # Safety
 * `session` must be null or a live handle from `mg_session_new*`.
 */
enum MgErrorCode mg_session_release(struct MgSession *session, uint32_t tile_index, uint64_t t_ms);

/**
 * Advance the session clock, driving idle flash prompts.
 *
 * # Safety
 * `session` must be null or a live handle from `mg_session_new*`.
 */
enum MgErrorCode mg_session_tick(struct MgSession *session, uint64_t now_ms);

/**
 * Fill `out` (at least 12 entries) with the tile visuals at the session's
 * current clock, in canonical order.
 *
 * # Safety
 * `session` must be a live handle; `out` must be valid for `len` writes.
 */
enum MgErrorCode mg_session_frame(struct MgSession *session, struct MgTileVisual *out, size_t len);

/**
 * Drain events produced since the previous call as a JSON array of wire
 * `event` objects.
 *
 * # Safety
 * `session` must be a live handle; `out` must be valid for writing a
 * string pointer, which the caller frees with `mg_string_free`.
 */
enum MgErrorCode mg_session_take_events_json(struct MgSession *session, char **out);

/**
 * # Safety
 * `session` must be a live handle; `out` must be valid for a write.
 */
enum MgErrorCode mg_session_completion_degree(struct MgSession *session, uint32_t *out);

/**
 * Current round number (1-based; 0 before the first round).
 *
 * # Safety
 * `session` must be a live handle; `out` must be valid for a write.
 */
enum MgErrorCode mg_session_round(struct MgSession *session, uint32_t *out);

/**
 * End the session and return its summary as a JSON object. Further input
 * fails with `SessionEnded`.
 *
 * # Safety
 * `session` must be a live handle; `out` must be valid for writing a
 * string pointer, which the caller frees with `mg_string_free`.
 */
enum MgErrorCode mg_session_end(struct MgSession *session, uint64_t now_ms, char **out);

/**
 * Release a session handle. Null is ignored.
 *
 * # Safety
 * `session` must be null or a live handle not used again afterwards.
 */
void mg_session_free(struct MgSession *session);

/**
 * Canonical index of the mirrored tile (same position, other side).
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum MgErrorCode mg_tile_mirror(uint32_t tile_index, uint32_t *out);

/**
 * Parse `"P-r-c"` / `"C-r-c"` into a canonical index.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for a write.
 */
enum MgErrorCode mg_tile_parse(const char *text, uint32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAGICARPET_H */
