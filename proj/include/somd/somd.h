/*
 * somd: software-mention tagging toolkit, C interface.
 *
 * Every function returns a somd_status. On failure the thread-local message
 * from somd_last_error() describes the problem. Objects are opaque handles
 * released with their *_free function; strings handed out through `char**`
 * parameters are released with somd_string_free. Handles are immutable after
 * construction and may be shared between threads for reading.
 */
#ifndef SOMD_SOMD_H
#define SOMD_SOMD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SOMD_BUILDING_LIBRARY)
#    define SOMD_API __declspec(dllexport)
#  else
#    define SOMD_API __declspec(dllimport)
#  endif
#else
#  define SOMD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum somd_status {
  SOMD_OK = 0,
  SOMD_ERR_INVALID_ARGUMENT = 1,
  SOMD_ERR_MALFORMED_LINE,
  SOMD_ERR_UNKNOWN_LABEL,
  SOMD_ERR_EMPTY_SENTENCE,
  SOMD_ERR_INVALID_IOB2,
  SOMD_ERR_OVERLAPPING_SPANS,
  SOMD_ERR_SPAN_OUT_OF_RANGE,
  SOMD_ERR_LENGTH_MISMATCH,
  SOMD_ERR_NON_MONOTONE_WORD_INDEX,
  SOMD_ERR_GAP_IN_WORD_INDICES,
  SOMD_ERR_ALL_ZERO_COUNTS,
  SOMD_ERR_EMPTY_BATCH,
  SOMD_ERR_EMPTY_SUPERVISION,
  SOMD_ERR_INCOMPATIBLE_TAG_SET,
  SOMD_ERR_SENTENCE_COUNT_MISMATCH,
  SOMD_ERR_TOKEN_MISMATCH,
  SOMD_ERR_INVALID_CONFIG,
  SOMD_ERR_FILE_NOT_FOUND,
  SOMD_ERR_IO,
  SOMD_ERR_MODEL_FORMAT,
  SOMD_ERR_INTERNAL
} somd_status;

/* Which label inventory a dataset's tags are drawn from. */
typedef enum somd_label_space {
  SOMD_LABELS_COMPOSITE = 0, /* Software_Mention composites */
  SOMD_LABELS_SOFTWARE = 1,  /* software types only (dual-classifier stream) */
  SOMD_LABELS_MENTION = 2    /* mention types only (dual-classifier stream) */
} somd_label_space;

typedef enum somd_strategy {
  SOMD_STRATEGY_WORD = 0,
  SOMD_STRATEGY_UNIFIED = 1,
  SOMD_STRATEGY_SELECTIVE = 2
} somd_strategy;

typedef enum somd_scaling_mode { SOMD_SCALE_RESCALE = 0, SOMD_SCALE_CLIP = 1 } somd_scaling_mode;

typedef enum somd_merge_policy {
  SOMD_MERGE_STRICT = 0,
  SOMD_MERGE_SOFTWARE_PRECEDENCE = 1
} somd_merge_policy;

typedef struct somd_catalog somd_catalog;
typedef struct somd_dataset somd_dataset;
typedef struct somd_model somd_model;

SOMD_API const char* somd_version(void);
SOMD_API const char* somd_status_name(somd_status status);
/* Message of the last failed call on this thread ("" when none). */
SOMD_API const char* somd_last_error(void);
SOMD_API void somd_string_free(char* s);

/* Catalogs ---------------------------------------------------------------- */

SOMD_API somd_status somd_catalog_default(somd_catalog** out);
/* "software:" and "mention:" sections with one type name per line. */
SOMD_API somd_status somd_catalog_parse(const char* text, somd_catalog** out);
SOMD_API somd_status somd_catalog_to_text(const somd_catalog* catalog, char** out);
SOMD_API void somd_catalog_free(somd_catalog* catalog);

/* Datasets ---------------------------------------------------------------- */

/* Two-column CoNLL text ("token<TAB>tag", blank line between sentences).
 * strict != 0 rejects IOB2 violations; otherwise they are recorded and can
 * be read back with somd_dataset_violations_json. */
SOMD_API somd_status somd_dataset_parse(const char* text, const somd_catalog* catalog,
                                        somd_label_space space, int strict,
                                        somd_dataset** out);
SOMD_API somd_status somd_dataset_serialize(const somd_dataset* dataset, char** out);
SOMD_API size_t somd_dataset_size(const somd_dataset* dataset);
SOMD_API size_t somd_dataset_violation_count(const somd_dataset* dataset);
/* JSON array of {sentence, line, index, kind, message}. */
SOMD_API somd_status somd_dataset_violations_json(const somd_dataset* dataset, char** out);
/* JSON object: token_counts, span_counts, sentences_all_o,
 * sentences_with_mention, o_fraction. */
SOMD_API somd_status somd_dataset_stats_json(const somd_dataset* dataset, char** out);
SOMD_API void somd_dataset_free(somd_dataset* dataset);

/* Alignment --------------------------------------------------------------- */

typedef struct somd_align_options {
  somd_strategy strategy;     /* SOMD_STRATEGY_UNIFIED or _SELECTIVE */
  size_t chunk;               /* built-in segmenter width, >= 1 */
  int unified_bi_conversion;  /* B- -> I- on continuation pieces (unified) */
  const char* piece_map_text; /* optional "piece<TAB>word_index" blocks */
} somd_align_options;

SOMD_API void somd_align_options_init(somd_align_options* options);
/* Per sentence, "piece<TAB>word_index<TAB>target" lines (IGNORE for
 * unsupervised pieces), blank line between sentences. */
SOMD_API somd_status somd_align(const somd_dataset* dataset, const somd_align_options* options,
                                char** out);

/* Rebalancing ------------------------------------------------------------- */

/* Scaled inverse-frequency class weights as a JSON object {class: weight}.
 * Frequencies are counted at the supervision level of `strategy`. */
SOMD_API somd_status somd_class_weights_json(const somd_dataset* dataset, double w_max,
                                             somd_scaling_mode mode, somd_strategy strategy,
                                             size_t chunk, char** out);
SOMD_API somd_status somd_adaptive_sample(const somd_dataset* dataset, size_t factor,
                                          double multiplier, uint64_t seed, somd_dataset** out);

/* Dual classifier --------------------------------------------------------- */

SOMD_API somd_status somd_split(const somd_dataset* dataset, const somd_catalog* catalog,
                                somd_dataset** software, somd_dataset** mention);
SOMD_API somd_status somd_merge(const somd_dataset* software, const somd_dataset* mention,
                                const somd_catalog* catalog, somd_merge_policy policy,
                                somd_dataset** out);

/* Tagger ------------------------------------------------------------------ */

typedef struct somd_train_options {
  somd_strategy strategy;
  size_t epochs;
  double learning_rate;
  uint64_t seed;
  double l2;
  size_t context_window;
  size_t batch_size;
  size_t chunk;
  int unified_bi_conversion;
  const char* class_weights_json; /* optional {class: weight} */
  int adaptive_sampling;          /* resample the training set first */
  size_t sample_factor;
  double sample_multiplier;
} somd_train_options;

SOMD_API void somd_train_options_init(somd_train_options* options);
SOMD_API somd_status somd_train(const somd_dataset* dataset, const somd_train_options* options,
                                somd_model** out);
SOMD_API somd_status somd_model_save(const somd_model* model, const char* path);
SOMD_API somd_status somd_model_load(const char* path, somd_model** out);
SOMD_API somd_status somd_model_to_json(const somd_model* model, char** out);
/* Tags token blocks (first column of each line; further columns ignored)
 * and returns two-column CoNLL. */
SOMD_API somd_status somd_predict(const somd_model* model, const char* input_text, char** out);
SOMD_API void somd_model_free(somd_model* model);

/* Scoring ----------------------------------------------------------------- */

/* Exact-match report JSON: micro, per_class, confusions, repairs_applied. */
SOMD_API somd_status somd_score_json(const somd_dataset* gold, const somd_dataset* pred,
                                     char** out);
/* Human-readable table of the same report. */
SOMD_API somd_status somd_score_table(const somd_dataset* gold, const somd_dataset* pred,
                                      int per_class, char** out);

/* Experiments ------------------------------------------------------------- */

/* Runs the single experiment described by `config_text` (relative paths
 * resolve against base_dir) into out_dir and returns report.json. */
SOMD_API somd_status somd_run_experiment(const char* config_text, const char* base_dir,
                                         const char* out_dir, char** report_json);
/* Runs every [experiment] section; returns the summary TSV. Sets
 * *failed_rows to the number of rows that failed. */
SOMD_API somd_status somd_run_grid(const char* config_text, const char* base_dir,
                                   const char* out_dir, char** summary_tsv,
                                   size_t* failed_rows);

#ifdef __cplusplus
}
#endif

#endif /* SOMD_SOMD_H */
