#ifndef MST_H
#define MST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define MST_NOTATION_DECIMAL 0

#define MST_NOTATION_SCIENTIFIC 1

typedef enum MstStatus {
  MST_STATUS_OK = 0,
  MST_STATUS_NULL_POINTER = 1,
  MST_STATUS_INVALID_UTF8 = 2,
  MST_STATUS_INVALID_ARGUMENT = 3,
  MST_STATUS_PARSE_ERROR = 4,
  MST_STATUS_INCOMPATIBLE = 5,
  MST_STATUS_IO_ERROR = 6,
  MST_STATUS_MODEL_ERROR = 7,
  MST_STATUS_OUT_OF_RANGE = 8,
  MST_STATUS_PANIC = 9,
} MstStatus;

// Tokens, numeric flags and scale indices of one annotated text.
typedef struct MstAnnotation MstAnnotation;

// A loaded checkpoint with its vocabulary.
typedef struct MstModel MstModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call on the same thread.
const char *mst_last_error_message(void);

void mst_string_free(char *s);

// Rewrites every measurement in `text` to its family head unit.
enum MstStatus mst_rule_convert_text(const char *text, char **out);

// Renders `number` in `notation` (`MST_NOTATION_DECIMAL` or
// `MST_NOTATION_SCIENTIFIC`).
enum MstStatus mst_convert_notation(const char *number, int32_t notation, char **out);

// Writes -1, 0 or 1 as `a` is less than, equal to or greater than `b`.
enum MstStatus mst_compare_measurements(const char *a, const char *b, int32_t *out);

enum MstStatus mst_quantities_equal(const char *a, const char *b, bool *out);

enum MstStatus mst_annotate(const char *text, size_t cap, struct MstAnnotation **out);

// Number of tokens; 0 for NULL.
size_t mst_annotation_len(const struct MstAnnotation *a);

// Token `i`. `token` stays valid while the handle lives.
enum MstStatus mst_annotation_token(const struct MstAnnotation *a,
                                    size_t i,
                                    const char **token,
                                    bool *numeric,
                                    size_t *scale_index);

// Tab-separated `token flag index` lines.
enum MstStatus mst_annotation_dump(const struct MstAnnotation *a, char **out);

void mst_annotation_free(struct MstAnnotation *a);

enum MstStatus mst_model_load(const char *path, struct MstModel **out);

// Index of the best of `n` candidate words at the single `[MASK]` in `text`.
enum MstStatus mst_model_predict(const struct MstModel *m,
                                 const char *text,
                                 const char *const *candidates,
                                 size_t n,
                                 size_t *out);

void mst_model_free(struct MstModel *m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MST_H */
