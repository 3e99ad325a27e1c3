/* C interface to the hint-dataset toolkit.
 *
 * Objects are opaque handles released with their *_free function. Every
 * fallible call returns a thg_status; on failure thg_last_error() describes
 * the problem for the calling thread. Strings returned through char** are
 * heap copies owned by the caller and released with thg_string_free. */
#ifndef TRIVIAHG_TRIVIAHG_H
#define TRIVIAHG_TRIVIAHG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define THG_API __declspec(dllexport)
#else
#define THG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum thg_status {
  THG_OK = 0,
  THG_E_INVALID_ARGUMENT = 1,
  THG_E_PARSE = 2,
  THG_E_VALIDATION = 3,
  THG_E_IO = 4,
  THG_E_TRANSPORT = 5,
  THG_E_FIXTURE_MISSING = 6,
  THG_E_FIXTURE_CORRUPT = 7,
  THG_E_ARTICLE_MISSING = 8,
  THG_E_UNDEFINED_VALUE = 9,
  THG_E_PROTOCOL = 10,
  THG_E_GENERATION = 11,
  THG_E_CLASSIFICATION = 12,
  THG_E_JUDGEMENT = 13,
  THG_E_NOT_FOUND = 14,
  THG_E_INTERNAL = 15
} thg_status;

/* Validation levels for reading and writing datasets. */
enum { THG_LEVEL_RAW = 0, THG_LEVEL_ADMITTED = 1, THG_LEVEL_FINAL = 2 };

/* HIFAS aggregation modes. */
enum { THG_MODE_MIN = 0, THG_MODE_AVG = 1, THG_MODE_MAX = 2 };

/* Difficulty levels. */
enum { THG_EASY = 0, THG_MEDIUM = 1, THG_HARD = 2 };

typedef struct thg_dataset thg_dataset;
typedef struct thg_client thg_client;
typedef struct thg_normalizer thg_normalizer;
typedef struct thg_annotation_server thg_annotation_server;

THG_API const char* thg_version(void);
THG_API const char* thg_status_name(thg_status status);
/* Message of the last failure on this thread; "" when none. */
THG_API const char* thg_last_error(void);
THG_API void thg_string_free(char* s);

/* ---- datasets ---- */

THG_API thg_status thg_dataset_read(const char* path, int level, thg_dataset** out);
THG_API thg_status thg_dataset_write(const thg_dataset* ds, const char* path, int level);
THG_API size_t thg_dataset_size(const thg_dataset* ds);
/* One record as a JSONL line (no trailing newline), checked at Raw level. */
THG_API thg_status thg_dataset_record_json(const thg_dataset* ds, size_t index, char** out);
THG_API void thg_dataset_free(thg_dataset* ds);

/* Seeded train/validation/test split; counts must sum to the dataset size. */
THG_API thg_status thg_dataset_split(const thg_dataset* ds, size_t train, size_t validation,
                                     size_t test, uint64_t seed, thg_dataset** train_out,
                                     thg_dataset** validation_out, thg_dataset** test_out);

/* ---- service clients ---- */

/* Offline client answered only from fixture files. */
THG_API thg_status thg_client_replay(const char* const* fixture_paths, size_t n_fixtures,
                                     size_t parallelism, thg_client** out);
/* Client wired from a pipeline config file (endpoints, fixtures, cache). */
THG_API thg_status thg_client_from_config(const char* config_path, thg_client** out);
/* {"hits":..,"misses":..,"network_calls":..,"max_in_flight":..} */
THG_API thg_status thg_client_stats_json(const thg_client* client, char** out);
THG_API void thg_client_free(thg_client* client);

/* ---- question pipeline ---- */

/* Labels records lacking a type (keyword rules, or the chat model when
 * client is non-NULL), drops DESCRIPTION questions, then samples each
 * remaining major class. */
THG_API thg_status thg_sample(const thg_dataset* in, double fraction, uint64_t seed,
                              thg_client* classifier_client, thg_dataset** out);

/* ---- hint pipeline ---- */

/* Elicits and verifies answers, then collects hints. report_json lists the
 * rejected questions by reason. report_json may be NULL. */
THG_API thg_status thg_generate_hints(thg_client* client, const thg_dataset* in,
                                      int hints_per_question, thg_dataset** out,
                                      char** report_json);

/* Drops leaking and question-like hints, then questions left with fewer
 * than min_hints (0 disables pruning). */
THG_API thg_status thg_filter_hints(thg_client* client, const thg_dataset* in, double threshold,
                                    int min_hints, thg_dataset** out, char** report_json);

/* ---- convergence ---- */

/* Convergence score over a 0/1 validity array: 0 when ea_valid is 0, else
 * 1 - (sum - 1) / n. */
THG_API thg_status thg_hicos(const int* cand_valid, size_t n, int ea_valid, double* out);
THG_API thg_status thg_score_hicos(thg_client* client, const thg_dataset* in, int n_candidates,
                                   int generate_max, thg_dataset** out);

/* ---- familiarity ---- */

/* Fits from a {title, mean_monthly_views} JSONL corpus. */
THG_API thg_status thg_normalizer_fit_corpus(const char* corpus_path, thg_normalizer** out);
THG_API thg_status thg_normalizer_fit_values(const double* values, size_t n, thg_normalizer** out);
/* Loads a normalizer JSON, or fits a corpus when the path ends in .jsonl. */
THG_API thg_status thg_normalizer_load(const char* path, thg_normalizer** out);
THG_API thg_status thg_normalizer_save(const thg_normalizer* n, const char* path);
THG_API thg_status thg_normalizer_json(const thg_normalizer* n, char** out);
THG_API double thg_normalizer_normalize(const thg_normalizer* n, double views);
THG_API void thg_normalizer_free(thg_normalizer* n);

/* gazetteer_path selects the gazetteer extractor; NULL uses the chat model. */
THG_API thg_status thg_score_hifas(thg_client* client, const thg_dataset* in,
                                   const thg_normalizer* normalizer, const char* gazetteer_path,
                                   int mode, thg_dataset** out);

/* ---- analytics ---- */

THG_API thg_status thg_answer_difficulty(double popularity, int* level);
THG_API thg_status thg_question_difficulty(double fraction, int* level);
THG_API thg_status thg_pearson(const double* xs, const double* ys, size_t n, double* out);
THG_API thg_status thg_mse(const double* xs, const double* ys, size_t n, double* out);

/* JSONL, one line per record: q_id, answer and question difficulty.
 * passages_path is a stub retriever file; retriever_url selects an HTTP
 * retriever instead (one must be non-NULL). */
THG_API thg_status thg_difficulty(const thg_dataset* ds, const char* passages_path,
                                  const char* retriever_url, size_t k, char** out_jsonl);

/* The eight dataset aggregates (lengths, counts, entities, sources) as JSON. */
THG_API thg_status thg_stats(const thg_dataset* ds, char** out_json);

/* metric is "hicos" or "hifas". hicos yields one report; hifas compares the
 * three aggregation modes. */
THG_API thg_status thg_correlate(const thg_dataset* ds, const char* ratings_path,
                                 const char* metric, char** out_json);

/* CSV n,pearson_r,n_samples. */
THG_API thg_status thg_sweep(thg_client* client, const thg_dataset* ds, const char* ratings_path,
                             int n_from, int n_to, int generate_max, char** out_csv);

/* ---- orchestration ---- */

/* Runs (or resumes) the whole pipeline; out_manifest receives the manifest
 * JSON, or the stage reports when stop_after halts the run early. */
THG_API thg_status thg_run_pipeline(const char* config_path, const char* stop_after, int resume,
                                    char** out_manifest);

THG_API thg_status thg_annotation_server_create(const thg_dataset* ds, const char* plan_path,
                                                const char* log_path, const char* bearer_token,
                                                thg_annotation_server** out);
/* Serves on a background thread; *bound_port receives the actual port. */
THG_API thg_status thg_annotation_server_start(thg_annotation_server* s, const char* host,
                                               int port, int* bound_port);
/* Serves on the calling thread until thg_annotation_server_stop. */
THG_API thg_status thg_annotation_server_run(thg_annotation_server* s, const char* host, int port);
THG_API void thg_annotation_server_stop(thg_annotation_server* s);
THG_API void thg_annotation_server_free(thg_annotation_server* s);

#ifdef __cplusplus
}
#endif

#endif /* TRIVIAHG_TRIVIAHG_H */
