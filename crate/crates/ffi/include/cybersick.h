#ifndef CYBERSICK_H
#define CYBERSICK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every fallible function.
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  // A required pointer argument was NULL.
  CS_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  CS_STATUS_INVALID_UTF8 = 2,
  // Reading a file failed.
  CS_STATUS_IO = 3,
  // The model text is malformed or built for a different attribute registry.
  CS_STATUS_MODEL_FORMAT = 4,
  // An argument had the wrong length or an out-of-range value.
  CS_STATUS_INVALID_ARGUMENT = 5,
  // An output buffer is too small.
  CS_STATUS_BUFFER_TOO_SMALL = 6,
  // An internal panic was caught.
  CS_STATUS_PANIC = 7,
} CsStatus;

// A loaded model. Thread-safe for concurrent prediction.
typedef struct CsModel CsModel;

// Streaming protocol state for one client. Not thread-safe: use one
// scorer per thread, or serialize calls.
typedef struct CsScorer CsScorer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Loads a model file from `path`.
//
// # Safety
// `path` is a NUL-terminated string; `out` points to writable storage.
enum CsStatus cs_model_load_file(const char *path, struct CsModel **out);

// Loads a model from its text form.
//
// # Safety
// `text` is a NUL-terminated string; `out` points to writable storage.
enum CsStatus cs_model_load_str(const char *text, struct CsModel **out);

// Releases a model. Scorers created from it stay valid.
//
// # Safety
// `model` is NULL or a handle from `cs_model_load_*` not yet freed.
void cs_model_free(struct CsModel *model);

// Number of classes the model predicts: 2 (binary) or 4 (quarterly).
//
// # Safety
// `model` is NULL or a live handle.
size_t cs_model_class_count(const struct CsModel *model);

// Predicts one frame. `values` holds `cs_attribute_count()` encoded
// attributes in registry order. Writes the class distribution into
// `distribution` (capacity `distribution_len`, at least the class count)
// and the most probable class into `label`. Either output may be NULL.
//
// # Safety
// `model` is a live handle; `values` points to `values_len` doubles;
// non-NULL outputs point to writable storage of the stated size.
enum CsStatus cs_model_predict(const struct CsModel *model,
                               const double *values,
                               size_t values_len,
                               double *distribution,
                               size_t distribution_len,
                               size_t *label);

// Number of attributes in a feature vector.
size_t cs_attribute_count(void);

// Name of attribute `index` as a static string, or NULL when out of range.
const char *cs_attribute_name(size_t index);

// Creates a scorer over `model`. `threshold` is the discomfort
// probability above which suggestions are attached; `top_n` is how many
// ranked attributes feed cause inference. Pass a negative threshold or
// zero `top_n` for the defaults (0.5 and 5).
//
// # Safety
// `model` is a live handle; `out` points to writable storage.
enum CsStatus cs_scorer_new(const struct CsModel *model,
                            double threshold,
                            size_t top_n,
                            struct CsScorer **out);

// Handles one protocol message (a JSON object, no trailing newline) and
// writes the JSON reply into `reply`. Protocol-level problems such as
// malformed JSON still return `CS_STATUS_OK` with an error reply, matching the
// TCP server.
//
// # Safety
// `scorer` is a live handle; `line` is a NUL-terminated string; `reply`
// points to writable storage.
enum CsStatus cs_scorer_handle_line(struct CsScorer *scorer, const char *line, char **reply);

// Number of sessions the scorer has open.
//
// # Safety
// `scorer` is NULL or a live handle.
size_t cs_scorer_open_sessions(const struct CsScorer *scorer);

// Releases a scorer.
//
// # Safety
// `scorer` is NULL or a handle from `cs_scorer_new` not yet freed.
void cs_scorer_free(struct CsScorer *scorer);

// Releases a string returned by this library.
//
// # Safety
// `s` is NULL or a string from this library not yet freed.
void cs_string_free(char *s);

// Message for the last failure on this thread, or NULL if none. Valid
// until the next failing call on the same thread.
const char *cs_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CYBERSICK_H */
