#include "termharm/termharm.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>

#include "termharm/evalharness.hpp"
#include "termharm/harmonizer.hpp"
#include "termharm/ratesvc.hpp"
#include "termharm/raters.hpp"
#include "termharm/sif.hpp"
#include "termharm/stats.hpp"
#include "termharm/termbase.hpp"
#include "termharm/tokenize.hpp"
#include "termharm/vecstore.hpp"

namespace th = termharm;

struct th_corpus {
  th::EntryCorpus value;
};
struct th_dataset {
  th::RatingDataset value;
};
struct th_vectors {
  th::WordVectorStore value;
};
struct th_probs {
  th::WordProbabilityTable value;
};
struct th_embedding {
  th::EmbeddingMatrix value;
};
struct th_similarity {
  th::SimilarityMatrix value;
};
struct th_run_config {
  std::map<std::string, std::string> values;
};
struct th_service {
  std::unique_ptr<th::RatingService> value;
};

namespace {

thread_local std::string g_last_error;

th_status status_of(th::ErrorKind kind) {
  switch (kind) {
    case th::ErrorKind::InvalidArgument: return TH_INVALID_ARGUMENT;
    case th::ErrorKind::Parse: return TH_PARSE;
    case th::ErrorKind::NotFound: return TH_NOT_FOUND;
    case th::ErrorKind::Duplicate: return TH_DUPLICATE;
    case th::ErrorKind::Undefined: return TH_UNDEFINED;
    case th::ErrorKind::State: return TH_STATE;
    case th::ErrorKind::Io: return TH_IO;
  }
  return TH_INTERNAL;
}

template <class F>
th_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return TH_OK;
  } catch (const th::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TH_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TH_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) th::fail(th::ErrorKind::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

template <class Write>
void render(char** out, Write&& write) {
  require(out != nullptr, "out");
  std::ostringstream ss;
  write(ss);
  *out = dup_string(ss.str());
}

th::TokenInput token_input(th_token_input input) {
  switch (input) {
    case TH_INPUT_ENTRIES: return th::TokenInput::Entries;
    case TH_INPUT_TERMS: return th::TokenInput::Terms;
    case TH_INPUT_DEFINITIONS: return th::TokenInput::Definitions;
  }
  th::fail(th::ErrorKind::InvalidArgument, "unknown token input");
}

th::AlphaMetric alpha_metric(th_alpha_metric m) {
  if (m == TH_ALPHA_ORDINAL) return th::AlphaMetric::Ordinal;
  if (m == TH_ALPHA_INTERVAL) return th::AlphaMetric::Interval;
  th::fail(th::ErrorKind::InvalidArgument, "unknown alpha metric");
}

th::EmbeddingConfig embedding_config(const th_embed_options* options, const th_probs* probs) {
  th_embed_options defaults;
  th_embed_options_default(&defaults);
  const auto& o = options ? *options : defaults;
  th::EmbeddingConfig cfg;
  cfg.a = o.a;
  cfg.d_pcr = o.d_pcr;
  cfg.token_input = token_input(o.input);
  cfg.drop_stopwords = o.drop_stopwords != 0;
  cfg.probabilities = probs ? &probs->value : nullptr;
  th::validate(cfg);
  return cfg;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

template <class T, class... Args>
void make(T** out, Args&&... args) {
  require(out != nullptr, "out");
  *out = new T{std::forward<Args>(args)...};
}

}  // namespace

extern "C" {

const char* th_last_error(void) { return g_last_error.c_str(); }

const char* th_status_name(th_status status) {
  switch (status) {
    case TH_OK: return "ok";
    case TH_INVALID_ARGUMENT: return "invalid_argument";
    case TH_PARSE: return "parse_error";
    case TH_NOT_FOUND: return "not_found";
    case TH_DUPLICATE: return "duplicate";
    case TH_UNDEFINED: return "undefined";
    case TH_STATE: return "state_error";
    case TH_IO: return "io_error";
    case TH_INTERNAL: return "internal_error";
  }
  return "unknown";
}

void th_free(void* p) { std::free(p); }

// Corpus -----------------------------------------------------------------

th_status th_corpus_load(const char* path, th_corpus** out) {
  return guard([&] {
    require(path, "path");
    make(out, th::load_entry_corpus(path));
  });
}

void th_corpus_destroy(th_corpus* corpus) { delete corpus; }

size_t th_corpus_size(const th_corpus* corpus) { return corpus ? corpus->value.size() : 0; }

th_status th_corpus_export(const th_corpus* corpus, char** out) {
  return guard([&] {
    require(corpus, "corpus");
    render(out, [&](std::ostream& s) { th::write_entry_corpus(corpus->value, s); });
  });
}

// Dataset ----------------------------------------------------------------

th_status th_dataset_load(const char* path, const th_corpus* corpus, th_dataset** out) {
  return guard([&] {
    require(path, "path");
    make(out, th::load_rating_dataset(path, corpus ? &corpus->value : nullptr));
  });
}

void th_dataset_destroy(th_dataset* dataset) { delete dataset; }

size_t th_dataset_pair_count(const th_dataset* dataset) {
  return dataset ? dataset->value.pairs().size() : 0;
}

size_t th_dataset_rater_count(const th_dataset* dataset) {
  return dataset ? dataset->value.raters().size() : 0;
}

th_status th_dataset_median(const th_dataset* dataset, const char* pair_id, double* out) {
  return guard([&] {
    require(dataset && pair_id && out, "dataset, pair_id and out");
    *out = th::median_rating(dataset->value, pair_id).value();
  });
}

th_status th_dataset_export(const th_dataset* dataset, char** out) {
  return guard([&] {
    require(dataset, "dataset");
    render(out, [&](std::ostream& s) { th::write_rating_dataset(dataset->value, s); });
  });
}

// Vectors and probabilities ------------------------------------------------

th_status th_vectors_load(const char* path, const th_corpus* vocabulary, th_vectors** out) {
  return guard([&] {
    require(path, "path");
    if (!vocabulary) {
      make(out, th::load_vectors(path));
      return;
    }
    // Lookups fall back to lowercase, so filter on the lowercased form.
    std::unordered_set<std::string> keep;
    for (const auto& e : vocabulary->value.entries())
      for (auto& t : th::entry_token_bag(e, th::TokenInput::Entries))
        keep.insert(ascii_lower(t));
    make(out, th::load_vectors(path, [&](std::string_view token) {
           return keep.contains(ascii_lower(token));
         }));
  });
}

void th_vectors_destroy(th_vectors* vectors) { delete vectors; }
size_t th_vectors_size(const th_vectors* vectors) { return vectors ? vectors->value.size() : 0; }
size_t th_vectors_dimension(const th_vectors* vectors) {
  return vectors ? vectors->value.dimension() : 0;
}

th_status th_probs_load_counts(const char* path, th_probs** out) {
  return guard([&] {
    require(path, "path");
    make(out, th::load_frequency_counts(path));
  });
}

th_status th_probs_load_text(const char* path, th_probs** out) {
  return guard([&] {
    require(path, "path");
    make(out, th::load_text_frequencies(path));
  });
}

th_status th_probs_from_corpus(const th_corpus* corpus, th_probs** out) {
  return guard([&] {
    require(corpus, "corpus");
    make(out, th::corpus_frequencies(corpus->value));
  });
}

void th_probs_destroy(th_probs* probs) { delete probs; }
size_t th_probs_size(const th_probs* probs) { return probs ? probs->value.size() : 0; }

// Embeddings ---------------------------------------------------------------

void th_embed_options_default(th_embed_options* options) {
  if (!options) return;
  const th::EmbeddingConfig cfg;
  options->a = cfg.a;
  options->d_pcr = cfg.d_pcr;
  options->input = TH_INPUT_ENTRIES;
  options->drop_stopwords = 0;
}

th_status th_embed(const th_corpus* corpus, const th_vectors* vectors, const th_probs* probs,
                   const th_embed_options* options, th_embedding** out) {
  return guard([&] {
    require(corpus && vectors, "corpus and vectors");
    make(out, th::embed_corpus(corpus->value, vectors->value, embedding_config(options, probs)));
  });
}

void th_embedding_destroy(th_embedding* embedding) { delete embedding; }
size_t th_embedding_rows(const th_embedding* embedding) {
  return embedding ? embedding->value.rows() : 0;
}
size_t th_embedding_dimension(const th_embedding* embedding) {
  return embedding ? embedding->value.dimension() : 0;
}

th_status th_embedding_row(const th_embedding* embedding, size_t row, const char** id,
                           const double** values, int* degenerate) {
  return guard([&] {
    require(embedding, "embedding");
    const auto& m = embedding->value;
    if (row >= m.rows())
      th::fail(th::ErrorKind::NotFound, "row " + std::to_string(row) + " out of range");
    if (id) *id = m.id(row).c_str();
    if (values) *values = m.row(row).data();
    if (degenerate) *degenerate = m.degenerate(row) ? 1 : 0;
  });
}

th_status th_embedding_export(const th_embedding* embedding, char** out) {
  return guard([&] {
    require(embedding, "embedding");
    render(out, [&](std::ostream& s) { th::write_embedding_matrix(embedding->value, s); });
  });
}

// Similarities -------------------------------------------------------------

th_status th_similarity_compute(const th_embedding* embedding, int skip_degenerate,
                                th_similarity** out) {
  return guard([&] {
    require(embedding, "embedding");
    make(out, skip_degenerate ? th::similarity_matrix_filtered(embedding->value)
                              : th::similarity_matrix(embedding->value));
  });
}

void th_similarity_destroy(th_similarity* similarity) { delete similarity; }
size_t th_similarity_size(const th_similarity* similarity) {
  return similarity ? similarity->value.size() : 0;
}

th_status th_similarity_get(const th_similarity* similarity, const char* a, const char* b,
                            double* out) {
  return guard([&] {
    require(similarity && a && b && out, "similarity, ids and out");
    *out = similarity->value.get(a, b);
  });
}

th_status th_similarity_export(const th_similarity* similarity, char** out) {
  return guard([&] {
    require(similarity, "similarity");
    render(out, [&](std::ostream& s) { th::write_similarity_matrix(similarity->value, s); });
  });
}

th_status th_render_neighbors(const th_similarity* similarity, const th_corpus* corpus,
                              const char* entry_id, size_t k, char** out) {
  return guard([&] {
    require(similarity && entry_id, "similarity and entry_id");
    const auto* c = corpus ? &corpus->value : nullptr;
    const auto neighbors = th::rank_neighbors(similarity->value, c, entry_id, k);
    render(out, [&](std::ostream& s) {
      s << "rank\tentry_id\tsimilarity" << (c ? "\tterms" : "") << '\n';
      std::size_t rank = 0;
      for (const auto& n : neighbors) {
        s << ++rank << '\t' << n.entry_id << '\t' << n.similarity;
        if (c) {
          s << '\t';
          const auto& terms = c->at(n.entry_id).terms;
          for (std::size_t i = 0; i < terms.size(); ++i) s << (i ? "|" : "") << terms[i];
        }
        s << '\n';
      }
    });
  });
}

th_status th_render_thresholds(const th_similarity* similarity, const th_dataset* dataset,
                               double cutoff, char** out) {
  return guard([&] {
    require(similarity && dataset, "similarity and dataset");
    const auto rated = th::rated_comparisons(dataset->value);
    const auto analysis = th::threshold_analysis(similarity->value, rated, cutoff);
    render(out, [&](std::ostream& s) { th::write_threshold_analysis(analysis, s); });
  });
}

void th_candidate_thresholds_default(th_candidate_thresholds* thresholds) {
  if (!thresholds) return;
  const th::CandidateThresholds t;
  thresholds->doublette = t.doublette;
  thresholds->term_high = t.term_high;
  thresholds->definition_low = t.definition_low;
}

th_status th_render_candidates(const th_corpus* corpus, const th_vectors* vectors,
                               const th_probs* probs, const th_embed_options* options,
                               const th_candidate_thresholds* thresholds, char** out) {
  return guard([&] {
    require(corpus && vectors, "corpus and vectors");
    auto cfg = embedding_config(options, probs);
    auto matrix_for = [&](th::TokenInput input) {
      cfg.token_input = input;
      return th::similarity_matrix_filtered(th::embed_corpus(corpus->value, vectors->value, cfg));
    };
    const auto entry = matrix_for(th::TokenInput::Entries);
    const auto term = matrix_for(th::TokenInput::Terms);
    const auto def = matrix_for(th::TokenInput::Definitions);

    // Candidates need all three views; keep the entries present in each.
    std::vector<std::string> common;
    for (const auto& id : entry.ids())
      if (term.contains(id) && def.contains(id)) common.push_back(id);
    auto restrict = [&](const th::SimilarityMatrix& m) {
      if (m.size() == common.size()) return m;
      std::vector<double> upper;
      for (std::size_t i = 0; i < common.size(); ++i)
        for (std::size_t j = i + 1; j < common.size(); ++j)
          upper.push_back(m.get(common[i], common[j]));
      return th::SimilarityMatrix(common, std::move(upper));
    };

    th::CandidateThresholds t;
    if (thresholds) t = {thresholds->doublette, thresholds->term_high, thresholds->definition_low};
    const auto report = th::candidate_report(restrict(entry), restrict(term), restrict(def), t);
    render(out, [&](std::ostream& s) { th::write_candidate_report(report, &corpus->value, s); });
  });
}

// Statistics ---------------------------------------------------------------

th_status th_pair_count(uint64_t n, uint64_t* out) {
  return guard([&] {
    require(out, "out");
    *out = th::pair_count(n);
  });
}

th_status th_spearman(const double* x, const double* y, size_t n, double* rho,
                      double* p_value) {
  return guard([&] {
    require((x && y) || n == 0, "x and y");
    require(rho, "rho");
    const double r = th::spearman_rho({x, n}, {y, n});
    *rho = r;
    if (p_value) *p_value = th::spearman_p_value(r, n);
  });
}

th_status th_alpha(const th_dataset* dataset, th_alpha_metric metric, double* out) {
  return guard([&] {
    require(dataset && out, "dataset and out");
    *out = th::krippendorff_alpha(dataset->value, alpha_metric(metric));
  });
}

th_status th_render_agreement(const th_dataset* dataset, th_alpha_metric metric, char** out) {
  return guard([&] {
    require(dataset, "dataset");
    render(out, [&](std::ostream& s) {
      th::write_agreement_report(dataset->value, alpha_metric(metric), s);
    });
  });
}

th_status th_render_assessment(const th_dataset* dataset, const char* controls_path,
                               th_alpha_metric metric, char** out) {
  return guard([&] {
    require(dataset, "dataset");
    const auto controls = controls_path ? th::load_control_ratings(controls_path)
                                        : th::control_ratings_from(dataset->value);
    th::AssessmentOptions options;
    options.metric = alpha_metric(metric);
    const auto reports = th::assess_raters(dataset->value, controls, options);
    render(out, [&](std::ostream& s) {
      th::write_rater_assessment(dataset->value, reports, options.metric, s);
    });
  });
}

// Evaluation ---------------------------------------------------------------

th_status th_render_evaluation(const th_corpus* corpus, const th_vectors* vectors,
                               const th_probs* probs, const char* probs_name,
                               const th_embed_options* options, const th_dataset* dataset,
                               char** out) {
  return guard([&] {
    require(corpus && vectors && dataset, "corpus, vectors and dataset");
    const th::ProbabilitySource source{probs_name ? probs_name : (probs ? "custom" : "uniform"),
                                       probs ? &probs->value : nullptr};
    const auto result = th::evaluate(corpus->value, vectors->value, source,
                                     embedding_config(options, probs), dataset->value);
    render(out, [&](std::ostream& s) { th::write_report({result}, s); });
  });
}

th_status th_render_sweep(const th_corpus* corpus, const th_vectors* vectors,
                          const th_sweep_grid* grid, const th_dataset* dataset, char** out) {
  return guard([&] {
    require(corpus && vectors && dataset && grid, "corpus, vectors, grid and dataset");
    if (grid->n_sources == 0) th::fail(th::ErrorKind::InvalidArgument, "no probability source");
    require(grid->sources && grid->source_names, "grid sources");
    std::vector<th::ProbabilitySource> sources;
    for (size_t i = 0; i < grid->n_sources; ++i) {
      require(grid->source_names[i], "source name");
      sources.push_back({grid->source_names[i], grid->sources[i] ? &grid->sources[i]->value : nullptr});
    }
    auto g = th::default_grid(std::move(sources));
    if (grid->a_values) g.a_values.assign(grid->a_values, grid->a_values + grid->n_a);
    if (grid->d_pcr_values)
      g.d_pcr_values.assign(grid->d_pcr_values, grid->d_pcr_values + grid->n_d_pcr);
    if (grid->inputs) {
      g.token_inputs.clear();
      for (size_t i = 0; i < grid->n_inputs; ++i) g.token_inputs.push_back(token_input(grid->inputs[i]));
    }
    const auto results =
        th::sweep(corpus->value, vectors->value, g, dataset->value, grid->drop_stopwords != 0);
    render(out, [&](std::ostream& s) { th::write_report(results, s); });
  });
}

// Run configuration --------------------------------------------------------

th_status th_run_config_load(const char* path, th_run_config** out) {
  return guard([&] {
    require(path && out, "path and out");
    const auto cfg = th::load_run_config(path);
    auto rc = std::make_unique<th_run_config>();
    auto set = [&](const char* key, const auto& v) {
      if (!v) return;
      if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) {
        rc->values[key] = *v;
      } else {
        std::ostringstream ss;
        ss.precision(17);
        ss << *v;
        rc->values[key] = ss.str();
      }
    };
    set("a", cfg.a);
    set("d_pcr", cfg.d_pcr);
    set("prob_source", cfg.prob_source);
    set("token_input", cfg.token_input);
    set("vectors_path", cfg.vectors_path);
    set("corpus_path", cfg.corpus_path);
    set("dataset_path", cfg.dataset_path);
    *out = rc.release();
  });
}

void th_run_config_destroy(th_run_config* config) { delete config; }

const char* th_run_config_value(const th_run_config* config, const char* key) {
  if (!config || !key) return nullptr;
  auto it = config->values.find(key);
  return it == config->values.end() ? nullptr : it->second.c_str();
}

// Service ------------------------------------------------------------------

th_status th_service_open(const th_service_config* config, th_service** out) {
  return guard([&] {
    require(config && out, "config and out");
    th::ServiceConfig cfg;
    for (size_t i = 0; i < config->n_codes; ++i) {
      require(config->codes && config->codes[i], "code");
      cfg.codes.emplace_back(config->codes[i]);
    }
    if (config->pairs)
      for (const auto& p : config->pairs->value.pairs())
        if (p.kind == th::PairKind::Dataset) cfg.pairs.push_back(p);
    cfg.corpus = config->corpus ? &config->corpus->value : nullptr;
    if (config->controls_path) cfg.controls = th::load_control_items(config->controls_path);
    cfg.seed = config->seed;
    if (config->log_path) cfg.log_path = config->log_path;
    if (config->admin_token) cfg.admin_token = config->admin_token;
    *out = new th_service{std::make_unique<th::RatingService>(std::move(cfg))};
  });
}

void th_service_destroy(th_service* service) { delete service; }

th_status th_service_handle(th_service* service, const char* method, const char* target,
                            const char* body, const char* admin_token, int* http_status,
                            char** response) {
  return guard([&] {
    require(service && method && target && http_status && response,
            "service, method, target, http_status and response");
    const auto r = service->value->handle(method, target, body ? body : "",
                                          admin_token ? admin_token : "");
    *response = dup_string(r.body);
    *http_status = r.status;
  });
}

th_status th_service_serve(th_service* service, const char* host, int port,
                           void (*on_bound)(int port, void* user), void* user) {
  return guard([&] {
    require(service && host, "service and host");
    th::HttpServer server(*service->value);
    const int bound = server.bind(host, port);
    if (on_bound) on_bound(bound, user);
    server.listen();
  });
}

th_status th_service_export(th_service* service, char** dataset_tsv, char** controls_tsv) {
  return guard([&] {
    require(service && dataset_tsv && controls_tsv, "service and outputs");
    const auto ex = service->value->export_data();
    char* d = dup_string(ex.dataset);
    try {
      *controls_tsv = dup_string(ex.controls);
    } catch (...) {
      std::free(d);
      throw;
    }
    *dataset_tsv = d;
  });
}

}  // extern "C"
