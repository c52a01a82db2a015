#ifndef CQDA_H
#define CQDA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CqdaStatus {
  CQDA_STATUS_OK = 0,
  CQDA_STATUS_NULL_ARGUMENT = 1,
  CQDA_STATUS_INVALID_UTF8 = 2,
  /**
   * Query or order text is malformed or inconsistent.
   */
  CQDA_STATUS_INVALID_QUERY = 3,
  /**
   * Reading or validating the data failed.
   */
  CQDA_STATUS_DATA_ERROR = 4,
  /**
   * The query/order pair is not handled by the requested algorithm.
   */
  CQDA_STATUS_NOT_ROUTED = 5,
  CQDA_STATUS_OUT_OF_RANGE = 6,
  CQDA_STATUS_COUNT_OVERFLOW = 7,
  CQDA_STATUS_INTERNAL = 8,
  CQDA_STATUS_PANIC = 9,
} CqdaStatus;

typedef struct CqdaIndex CqdaIndex;

typedef struct CqdaInstance CqdaInstance;

typedef struct CqdaQuery CqdaQuery;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *cqda_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void cqda_string_free(char *s);

/**
 * Parses `Q(A,B) :- R(A,B), ...`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum CqdaStatus cqda_query_parse(const char *text, struct CqdaQuery **out);

/**
 * # Safety
 * `q` must come from [`cqda_query_parse`] and not have been freed.
 */
void cqda_query_free(struct CqdaQuery *q);

/**
 * Loads `<dir>/<Relation>.csv` for every relation of `q`.
 *
 * # Safety
 * `q` must be a live query handle, `dir` a NUL-terminated path, `out` writable.
 */
enum CqdaStatus cqda_instance_load(const struct CqdaQuery *q,
                                   const char *dir,
                                   struct CqdaInstance **out);

/**
 * # Safety
 * `db` must come from [`cqda_instance_load`] and not have been freed.
 */
void cqda_instance_free(struct CqdaInstance *db);

/**
 * Tractability report for `order` (`lex: A,B` or `sum: A`) as JSON.
 *
 * # Safety
 * `q` must be a live query handle, `order` NUL-terminated, `out` writable.
 */
enum CqdaStatus cqda_analyze_json(const struct CqdaQuery *q, const char *order, char **out);

/**
 * Preprocesses a direct-access index.
 *
 * # Safety
 * `q` and `db` must be live handles, `order` NUL-terminated, `out` writable.
 */
enum CqdaStatus cqda_index_build(const struct CqdaQuery *q,
                                 const struct CqdaInstance *db,
                                 const char *order,
                                 struct CqdaIndex **out);

/**
 * # Safety
 * `ix` must come from [`cqda_index_build`] and not have been freed.
 */
void cqda_index_free(struct CqdaIndex *ix);

/**
 * Number of answers. `CountOverflow` when it does not fit 64 bits.
 *
 * # Safety
 * `ix` must be a live index handle and `out` writable.
 */
enum CqdaStatus cqda_index_count(const struct CqdaIndex *ix, uint64_t *out);

/**
 * Answer at zero-based position `k` as a JSON object keyed by head variable.
 *
 * # Safety
 * `ix` must be a live index handle and `out` writable.
 */
enum CqdaStatus cqda_index_access_json(const struct CqdaIndex *ix, uint64_t k, char **out);

/**
 * Answer at position `k` by single access (no index), as JSON.
 *
 * # Safety
 * `q` and `db` must be live handles, `order` NUL-terminated, `out` writable.
 */
enum CqdaStatus cqda_select_json(const struct CqdaQuery *q,
                                 const struct CqdaInstance *db,
                                 const char *order,
                                 uint64_t k,
                                 uint64_t seed,
                                 char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CQDA_H */
