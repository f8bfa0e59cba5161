#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "termharm/termharm.h"

namespace {

const char* kCorpus = TEST_DATA_DIR "/toy_corpus.tsv";
const char* kVectors = TEST_DATA_DIR "/toy_vectors.txt";
const char* kRatings = TEST_DATA_DIR "/toy_ratings.tsv";
const char* kTwoRaters = TEST_DATA_DIR "/two_rater_ratings.tsv";

std::string take(char* s) {
  std::string out(s ? s : "");
  th_free(s);
  return out;
}

struct Loaded {
  th_corpus* corpus = nullptr;
  th_vectors* vectors = nullptr;
  th_dataset* ratings = nullptr;
  Loaded() {
    REQUIRE(th_corpus_load(kCorpus, &corpus) == TH_OK);
    REQUIRE(th_vectors_load(kVectors, corpus, &vectors) == TH_OK);
    REQUIRE(th_dataset_load(kRatings, corpus, &ratings) == TH_OK);
  }
  ~Loaded() {
    th_dataset_destroy(ratings);
    th_vectors_destroy(vectors);
    th_corpus_destroy(corpus);
  }
};

}  // namespace

TEST_CASE("statuses and thread-local messages") {
  th_corpus* c = nullptr;
  CHECK(th_corpus_load("/nonexistent.tsv", &c) == TH_IO);
  CHECK(c == nullptr);
  CHECK(std::strlen(th_last_error()) > 0);
  CHECK(std::string(th_status_name(TH_IO)) == "io_error");
  CHECK(std::string(th_status_name(TH_PARSE)) == "parse_error");
  CHECK(th_corpus_load(nullptr, &c) == TH_INVALID_ARGUMENT);
  uint64_t n = 0;
  CHECK(th_pair_count(446, &n) == TH_OK);
  CHECK(n == 99235);
  CHECK(std::string(th_last_error()).empty());
  CHECK(th_pair_count(0, &n) == TH_INVALID_ARGUMENT);
  CHECK(th_corpus_size(nullptr) == 0);
  th_corpus_destroy(nullptr);
  th_free(nullptr);
}

TEST_CASE("corpus and dataset round trips") {
  Loaded l;
  CHECK(th_corpus_size(l.corpus) == 11);
  const auto text = take([&] {
    char* s = nullptr;
    CHECK(th_corpus_export(l.corpus, &s) == TH_OK);
    return s;
  }());
  CHECK(text.starts_with("id\tterms\tdefinition\tsource\ne1\tencryption\t"));
  CHECK(th_dataset_pair_count(l.ratings) == 15);
  CHECK(th_dataset_rater_count(l.ratings) == 3);
  double m = 0;
  CHECK(th_dataset_median(l.ratings, "t01", &m) == TH_OK);
  CHECK(m == 4.0);
  CHECK(th_dataset_median(l.ratings, "zz", &m) == TH_NOT_FOUND);
  char* d = nullptr;
  CHECK(th_dataset_export(l.ratings, &d) == TH_OK);
  CHECK(take(d).find("t15\te1\te8\tdataset\t\trc\t0\n") != std::string::npos);
}

TEST_CASE("vectors, probabilities and embeddings") {
  Loaded l;
  CHECK(th_vectors_dimension(l.vectors) == 6);
  th_vectors* all = nullptr;
  REQUIRE(th_vectors_load(kVectors, nullptr, &all) == TH_OK);
  CHECK(th_vectors_size(all) >= th_vectors_size(l.vectors));
  th_vectors_destroy(all);

  th_probs* probs = nullptr;
  REQUIRE(th_probs_from_corpus(l.corpus, &probs) == TH_OK);
  CHECK(th_probs_size(probs) > 10);

  th_embed_options opts;
  th_embed_options_default(&opts);
  CHECK(opts.a == 1e-3);
  CHECK(opts.d_pcr == 0);
  opts.d_pcr = 1;
  th_embedding* emb = nullptr;
  REQUIRE(th_embed(l.corpus, l.vectors, probs, &opts, &emb) == TH_OK);
  CHECK(th_embedding_rows(emb) == 11);
  CHECK(th_embedding_dimension(emb) == 6);
  const char* id = nullptr;
  const double* values = nullptr;
  int degenerate = 0;
  REQUIRE(th_embedding_row(emb, 7, &id, &values, &degenerate) == TH_OK);
  CHECK(std::string(id) == "e8");
  CHECK(degenerate == 1);
  CHECK(th_embedding_row(emb, 11, &id, &values, &degenerate) == TH_NOT_FOUND);

  th_similarity* sim = nullptr;
  CHECK(th_similarity_compute(emb, 0, &sim) == TH_UNDEFINED);
  REQUIRE(th_similarity_compute(emb, 1, &sim) == TH_OK);
  CHECK(th_similarity_size(sim) == 10);
  double s = 0;
  CHECK(th_similarity_get(sim, "e1", "e9", &s) == TH_OK);
  CHECK(s > 0.99);
  CHECK(th_similarity_get(sim, "e1", "e8", &s) == TH_NOT_FOUND);

  char* out = nullptr;
  REQUIRE(th_render_neighbors(sim, l.corpus, "e1", 2, &out) == TH_OK);
  const auto ranked = take(out);
  CHECK(ranked.starts_with("rank\tentry_id\tsimilarity\tterms\n1\te2\t"));
  CHECK(ranked.find("\n2\te9\t") != std::string::npos);
  REQUIRE(th_render_thresholds(sim, l.ratings, 0.3, &out) == TH_OK);
  CHECK(take(out).find("rated_pairs_skipped\t1\n") != std::string::npos);

  opts.a = -1;
  CHECK(th_embed(l.corpus, l.vectors, probs, &opts, &emb) == TH_INVALID_ARGUMENT);

  th_similarity_destroy(sim);
  th_embedding_destroy(emb);
  th_probs_destroy(probs);
}

TEST_CASE("statistics") {
  const double x[] = {1, 2, 3, 4, 5}, y[] = {2, 1, 4, 3, 5};
  double rho = 0, p = 0;
  REQUIRE(th_spearman(x, y, 5, &rho, &p) == TH_OK);
  CHECK(rho == doctest::Approx(0.8));
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  CHECK(th_spearman(x, x, 2, &rho, &p) == TH_INVALID_ARGUMENT);

  th_dataset* d = nullptr;
  REQUIRE(th_dataset_load(kTwoRaters, nullptr, &d) == TH_OK);
  double alpha = 0;
  REQUIRE(th_alpha(d, TH_ALPHA_ORDINAL, &alpha) == TH_OK);
  CHECK(alpha == doctest::Approx(0.776).epsilon(1e-3));
  char* out = nullptr;
  REQUIRE(th_render_agreement(d, TH_ALPHA_INTERVAL, &out) == TH_OK);
  CHECK(take(out).find("u12\tu13\t152\t") != std::string::npos);
  CHECK(th_render_assessment(d, nullptr, TH_ALPHA_ORDINAL, &out) == TH_INVALID_ARGUMENT);
  th_dataset_destroy(d);
}

TEST_CASE("evaluation, sweep and run configuration") {
  Loaded l;
  th_embed_options opts;
  th_embed_options_default(&opts);
  opts.input = TH_INPUT_TERMS;
  char* out = nullptr;
  REQUIRE(th_render_evaluation(l.corpus, l.vectors, nullptr, "uniform", &opts, l.ratings, &out) ==
          TH_OK);
  CHECK(take(out).find("\nuniform\tterms\t0.001\t0\t") != std::string::npos);

  const th_probs* sources[] = {nullptr};
  const char* names[] = {"uniform"};
  const double a[] = {1e-3};
  const int pcr[] = {0, 1};
  const th_token_input inputs[] = {TH_INPUT_ENTRIES};
  th_sweep_grid grid{sources, names, 1, a, 1, pcr, 2, inputs, 1, 0};
  REQUIRE(th_render_sweep(l.corpus, l.vectors, &grid, l.ratings, &out) == TH_OK);
  const auto report = take(out);
  CHECK(report.find("# best over a per d_pcr") != std::string::npos);

  th_run_config* cfg = nullptr;
  CHECK(th_run_config_load("/nonexistent.conf", &cfg) == TH_IO);
}

TEST_CASE("rating service through the C interface") {
  Loaded l;
  const char* codes[] = {"c0de"};
  th_service_config cfg{codes, 1, l.corpus, l.ratings, nullptr, 9, nullptr, "tok"};
  th_service* svc = nullptr;
  REQUIRE(th_service_open(&cfg, &svc) == TH_OK);

  int status = 0;
  char* body = nullptr;
  REQUIRE(th_service_handle(svc, "POST", "/register", "{\"code\":\"c0de\"}", nullptr, &status,
                            &body) == TH_OK);
  CHECK(status == 201);
  const auto reg = take(body);
  CHECK(reg.find("\"total_items\":15") != std::string::npos);
  const auto pos = reg.find("\"rater_id\":\"") + 12;
  const auto id = reg.substr(pos, reg.find('"', pos) - pos);

  REQUIRE(th_service_handle(svc, "GET", "/export", nullptr, nullptr, &status, &body) == TH_OK);
  CHECK(status == 403);
  th_free(body);
  REQUIRE(th_service_handle(svc, "GET", ("/next?rater_id=" + id).c_str(), nullptr, nullptr,
                            &status, &body) == TH_OK);
  CHECK(status == 409);
  CHECK(take(body).find("instructions_not_confirmed") != std::string::npos);

  char* ds = nullptr;
  char* cs = nullptr;
  REQUIRE(th_service_export(svc, &ds, &cs) == TH_OK);
  CHECK(take(ds) == "pair_id\tleft_id\tright_id\tkind\tintended_rating\trater_id\trating\n");
  CHECK(take(cs) == "rater_id\tpair_id\tintended_rating\trating\tdeviation\n");
  CHECK(th_service_handle(svc, nullptr, "/x", nullptr, nullptr, &status, &body) ==
        TH_INVALID_ARGUMENT);
  th_service_destroy(svc);

  th_service_config missing{codes, 1, nullptr, l.ratings, nullptr, 9, nullptr, nullptr};
  CHECK(th_service_open(&missing, &svc) == TH_INVALID_ARGUMENT);
}
