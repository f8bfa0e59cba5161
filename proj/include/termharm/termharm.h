#ifndef TERMHARM_TERMHARM_H
#define TERMHARM_TERMHARM_H

#include <stddef.h>
#include <stdint.h>

#if defined(TERMHARM_BUILDING_LIBRARY)
#define TH_API __attribute__((visibility("default")))
#else
#define TH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum th_status {
  TH_OK = 0,
  TH_INVALID_ARGUMENT = 1,
  TH_PARSE = 2,
  TH_NOT_FOUND = 3,
  TH_DUPLICATE = 4,
  TH_UNDEFINED = 5,
  TH_STATE = 6,
  TH_IO = 7,
  TH_INTERNAL = 8
} th_status;

typedef enum th_token_input {
  TH_INPUT_ENTRIES = 0,
  TH_INPUT_TERMS = 1,
  TH_INPUT_DEFINITIONS = 2
} th_token_input;

typedef enum th_alpha_metric { TH_ALPHA_ORDINAL = 0, TH_ALPHA_INTERVAL = 1 } th_alpha_metric;

typedef struct th_corpus th_corpus;
typedef struct th_dataset th_dataset;
typedef struct th_vectors th_vectors;
typedef struct th_probs th_probs;
typedef struct th_embedding th_embedding;
typedef struct th_similarity th_similarity;
typedef struct th_service th_service;

/* Message of the last failure on the calling thread; empty after success. */
TH_API const char* th_last_error(void);
TH_API const char* th_status_name(th_status status);
/* Releases strings returned through char** out parameters. */
TH_API void th_free(void* p);

/* Entry corpus. */
TH_API th_status th_corpus_load(const char* path, th_corpus** out);
TH_API void th_corpus_destroy(th_corpus* corpus);
TH_API size_t th_corpus_size(const th_corpus* corpus);
TH_API th_status th_corpus_export(const th_corpus* corpus, char** out);

/* Rating dataset; corpus may be NULL to skip entry validation. */
TH_API th_status th_dataset_load(const char* path, const th_corpus* corpus, th_dataset** out);
TH_API void th_dataset_destroy(th_dataset* dataset);
TH_API size_t th_dataset_pair_count(const th_dataset* dataset);
TH_API size_t th_dataset_rater_count(const th_dataset* dataset);
TH_API th_status th_dataset_median(const th_dataset* dataset, const char* pair_id, double* out);
TH_API th_status th_dataset_export(const th_dataset* dataset, char** out);

/* Word vectors (text format, optionally gzip). With a corpus, only tokens that
   occur in it are kept. */
TH_API th_status th_vectors_load(const char* path, const th_corpus* vocabulary,
                                 th_vectors** out);
TH_API void th_vectors_destroy(th_vectors* vectors);
TH_API size_t th_vectors_size(const th_vectors* vectors);
TH_API size_t th_vectors_dimension(const th_vectors* vectors);

/* Word probabilities. A NULL th_probs means uniform weights everywhere. */
TH_API th_status th_probs_load_counts(const char* path, th_probs** out);
TH_API th_status th_probs_load_text(const char* path, th_probs** out);
TH_API th_status th_probs_from_corpus(const th_corpus* corpus, th_probs** out);
TH_API void th_probs_destroy(th_probs* probs);
TH_API size_t th_probs_size(const th_probs* probs);

typedef struct th_embed_options {
  double a;
  int d_pcr;
  th_token_input input;
  int drop_stopwords;
} th_embed_options;

TH_API void th_embed_options_default(th_embed_options* options);

TH_API th_status th_embed(const th_corpus* corpus, const th_vectors* vectors,
                          const th_probs* probs, const th_embed_options* options,
                          th_embedding** out);
TH_API void th_embedding_destroy(th_embedding* embedding);
TH_API size_t th_embedding_rows(const th_embedding* embedding);
TH_API size_t th_embedding_dimension(const th_embedding* embedding);
/* Pointers stay valid until the embedding is destroyed. */
TH_API th_status th_embedding_row(const th_embedding* embedding, size_t row, const char** id,
                                  const double** values, int* degenerate);
TH_API th_status th_embedding_export(const th_embedding* embedding, char** out);

/* Pairwise cosine matrix. With skip_degenerate, entries without any vector are
   left out instead of failing. */
TH_API th_status th_similarity_compute(const th_embedding* embedding, int skip_degenerate,
                                       th_similarity** out);
TH_API void th_similarity_destroy(th_similarity* similarity);
TH_API size_t th_similarity_size(const th_similarity* similarity);
TH_API th_status th_similarity_get(const th_similarity* similarity, const char* a,
                                   const char* b, double* out);
TH_API th_status th_similarity_export(const th_similarity* similarity, char** out);

/* Tab-separated reports. For neighbours the corpus may be NULL; when given,
   terms are printed and neighbours repeating a listed term set are skipped. */
TH_API th_status th_render_neighbors(const th_similarity* similarity, const th_corpus* corpus,
                                     const char* entry_id, size_t k, char** out);
TH_API th_status th_render_thresholds(const th_similarity* similarity,
                                      const th_dataset* dataset, double cutoff, char** out);

typedef struct th_candidate_thresholds {
  double doublette;
  double term_high;
  double definition_low;
} th_candidate_thresholds;

TH_API void th_candidate_thresholds_default(th_candidate_thresholds* thresholds);
TH_API th_status th_render_candidates(const th_corpus* corpus, const th_vectors* vectors,
                                      const th_probs* probs, const th_embed_options* options,
                                      const th_candidate_thresholds* thresholds, char** out);

/* Statistics. */
TH_API th_status th_pair_count(uint64_t n, uint64_t* out);
TH_API th_status th_spearman(const double* x, const double* y, size_t n, double* rho,
                             double* p_value);
TH_API th_status th_alpha(const th_dataset* dataset, th_alpha_metric metric, double* out);
TH_API th_status th_render_agreement(const th_dataset* dataset, th_alpha_metric metric,
                                     char** out);
/* controls_path may be NULL to use control pairs found in the dataset. */
TH_API th_status th_render_assessment(const th_dataset* dataset, const char* controls_path,
                                      th_alpha_metric metric, char** out);

/* Evaluation against median ratings. probs_name labels the probability source. */
TH_API th_status th_render_evaluation(const th_corpus* corpus, const th_vectors* vectors,
                                      const th_probs* probs, const char* probs_name,
                                      const th_embed_options* options,
                                      const th_dataset* dataset, char** out);

typedef struct th_sweep_grid {
  const th_probs* const* sources; /* entries may be NULL for uniform */
  const char* const* source_names;
  size_t n_sources;
  const double* a_values; /* NULL: 26 log-spaced values 1e-6 .. 1e-1 */
  size_t n_a;
  const int* d_pcr_values; /* NULL: 0..6 */
  size_t n_d_pcr;
  const th_token_input* inputs; /* NULL: all three */
  size_t n_inputs;
  int drop_stopwords;
} th_sweep_grid;

TH_API th_status th_render_sweep(const th_corpus* corpus, const th_vectors* vectors,
                                 const th_sweep_grid* grid, const th_dataset* dataset,
                                 char** out);

/* Flat key=value run configuration (keys: a, d_pcr, prob_source, token_input,
   vectors_path, corpus_path, dataset_path). */
typedef struct th_run_config th_run_config;

TH_API th_status th_run_config_load(const char* path, th_run_config** out);
TH_API void th_run_config_destroy(th_run_config* config);
/* Value for key, or NULL when the file does not set it. */
TH_API const char* th_run_config_value(const th_run_config* config, const char* key);

/* Rating service. An empty code list gives a service that only replays and
   exports. */
typedef struct th_service_config {
  const char* const* codes;
  size_t n_codes;
  const th_corpus* corpus;   /* presentations of dataset pairs */
  const th_dataset* pairs;   /* dataset-kind pairs to rate */
  const char* controls_path; /* may be NULL */
  uint64_t seed;
  const char* log_path;      /* may be NULL for an in-memory service */
  const char* admin_token;   /* may be NULL */
} th_service_config;

TH_API th_status th_service_open(const th_service_config* config, th_service** out);
TH_API void th_service_destroy(th_service* service);
/* Dispatches one JSON request; target may include a query string. */
TH_API th_status th_service_handle(th_service* service, const char* method, const char* target,
                                   const char* body, const char* admin_token, int* http_status,
                                   char** response);
/* Blocks serving HTTP. port 0 picks a free port; on_bound (may be NULL) is
   called with the bound port before serving starts. */
TH_API th_status th_service_serve(th_service* service, const char* host, int port,
                                  void (*on_bound)(int port, void* user), void* user);
TH_API th_status th_service_export(th_service* service, char** dataset_tsv, char** controls_tsv);

#ifdef __cplusplus
}
#endif

#endif
