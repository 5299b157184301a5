#ifndef REFMINE_H
#define REFMINE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a C API call.
 */
typedef enum RefmineStatus {
  REFMINE_STATUS_OK = 0,
  REFMINE_STATUS_NULL_POINTER = 1,
  REFMINE_STATUS_INVALID_UTF8 = 2,
  REFMINE_STATUS_INVALID_ARGUMENT = 3,
  REFMINE_STATUS_EMPTY_SEED_SET = 4,
  REFMINE_STATUS_OUT_OF_RANGE = 5,
  REFMINE_STATUS_IO = 6,
  REFMINE_STATUS_PARSE = 7,
  REFMINE_STATUS_INTERNAL = 8,
} RefmineStatus;

/**
 * Ordered post collection.
 */
typedef struct RefmineCorpus RefmineCorpus;

/**
 * Mined or loaded reference set.
 */
typedef struct RefmineRefset RefmineRefset;

/**
 * Mining settings. Start from `refmine_config_default`.
 */
typedef struct RefmineConfig {
  double threshold;
  size_t min_cooccur;
  bool two_sided_union;
  bool general_tokens;
  size_t batch_start;
  size_t batch_step;
} RefmineConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default settings: threshold 0.75, one shared post, two-sided union
 * check, general tokens on, batches of 200.
 */
struct RefmineConfig refmine_config_default(void);

/**
 * Message for the last failed call on this thread; empty after success.
 * Valid until the next call on the same thread.
 */
const char *refmine_last_error(void);

struct RefmineCorpus *refmine_corpus_new(void);

/**
 * Appends a post. Its id is its 1-based position.
 *
 * # Safety
 * `corpus` must come from this library; `text` must be a NUL-terminated string.
 */
enum RefmineStatus refmine_corpus_add_post(struct RefmineCorpus *corpus, const char *text);

/**
 * Loads posts from a text file (one per line) or a `.jsonl` file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RefmineStatus refmine_corpus_from_file(const char *path, struct RefmineCorpus **out);

/**
 * Number of posts; 0 for a null handle.
 *
 * # Safety
 * `corpus` must be null or come from this library.
 */
size_t refmine_corpus_len(const struct RefmineCorpus *corpus);

/**
 * # Safety
 * `corpus` must be null or come from this library, and not be used afterwards.
 */
void refmine_corpus_free(struct RefmineCorpus *corpus);

/**
 * Mines trees rooted on `seeds` (`n_seeds` strings). A null `cfg` uses defaults.
 *
 * # Safety
 * Pointers must be valid; `seeds` must hold `n_seeds` NUL-terminated strings.
 */
enum RefmineStatus refmine_mine_seeded(const struct RefmineCorpus *corpus,
                                       const char *const *seeds,
                                       size_t n_seeds,
                                       const struct RefmineConfig *cfg,
                                       struct RefmineRefset **out);

/**
 * Mines trees rooted on any qualifying term.
 *
 * # Safety
 * `corpus` and `out` must be valid; `cfg` may be null.
 */
enum RefmineStatus refmine_mine_unseeded(const struct RefmineCorpus *corpus,
                                         const struct RefmineConfig *cfg,
                                         struct RefmineRefset **out);

/**
 * Batch-wise mining with level locking over the corpus in order.
 * `converged` (may be null) reports whether every level locked.
 *
 * # Safety
 * `corpus` and `out` must be valid; `cfg` and `converged` may be null.
 */
enum RefmineStatus refmine_mine_locked(const struct RefmineCorpus *corpus,
                                       const struct RefmineConfig *cfg,
                                       struct RefmineRefset **out,
                                       bool *converged);

/**
 * Parses a reference-set CSV with a header row.
 *
 * # Safety
 * `csv` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RefmineStatus refmine_refset_from_csv(const char *csv, struct RefmineRefset **out);

/**
 * Number of tuples; 0 for a null handle.
 *
 * # Safety
 * `refset` must be null or come from this library.
 */
size_t refmine_refset_len(const struct RefmineRefset *refset);

/**
 * Number of columns; 0 for a null handle.
 *
 * # Safety
 * `refset` must be null or come from this library.
 */
size_t refmine_refset_width(const struct RefmineRefset *refset);

/**
 * Value at `row`, `column`. A missing value sets `*out` to NULL.
 *
 * # Safety
 * `refset` and `out` must be valid. Free the result with `refmine_string_free`.
 */
enum RefmineStatus refmine_refset_value(const struct RefmineRefset *refset,
                                        size_t row,
                                        size_t column,
                                        char **out);

/**
 * Serializes to CSV with an `attributeN` header.
 *
 * # Safety
 * `refset` and `out` must be valid. Free the result with `refmine_string_free`.
 */
enum RefmineStatus refmine_refset_to_csv(const struct RefmineRefset *refset, char **out);

/**
 * Fraction of mined values placed in a different column than in `gold`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum RefmineStatus refmine_column_homogeneity(const struct RefmineRefset *mined,
                                              const struct RefmineRefset *gold,
                                              double *out_fraction);

/**
 * # Safety
 * `refset` must be null or come from this library, and not be used afterwards.
 */
void refmine_refset_free(struct RefmineRefset *refset);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void refmine_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REFMINE_H */
