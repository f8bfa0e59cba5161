#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "termharm/termharm.h"

namespace {

// Data errors carry the library status so the error line stays machine-readable.
struct Failure {
  std::string code;
  std::string message;
};

void check(th_status s) {
  if (s != TH_OK) throw Failure{th_status_name(s), th_last_error()};
}

[[noreturn]] void usage(const std::string& message) { throw CLI::ValidationError(message); }

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using Corpus = std::unique_ptr<th_corpus, Deleter<th_corpus, th_corpus_destroy>>;
using Dataset = std::unique_ptr<th_dataset, Deleter<th_dataset, th_dataset_destroy>>;
using Vectors = std::unique_ptr<th_vectors, Deleter<th_vectors, th_vectors_destroy>>;
using Probs = std::unique_ptr<th_probs, Deleter<th_probs, th_probs_destroy>>;
using Embedding = std::unique_ptr<th_embedding, Deleter<th_embedding, th_embedding_destroy>>;
using Similarity = std::unique_ptr<th_similarity, Deleter<th_similarity, th_similarity_destroy>>;
using Service = std::unique_ptr<th_service, Deleter<th_service, th_service_destroy>>;
using RunConfig = std::unique_ptr<th_run_config, Deleter<th_run_config, th_run_config_destroy>>;

struct Text {
  char* p = nullptr;
  ~Text() { th_free(p); }
};

struct Options {
  std::string corpus, vectors, dataset, ratings, controls, controls_out, out, db, config;
  std::string query, metric = "ordinal", grid = "default", codes, host = "127.0.0.1";
  std::string admin_token, input = "entries";
  std::vector<std::string> probs;
  double a = 1e-3;
  int pcr = 0;
  std::size_t top_k = 10;
  double cutoff = 0.3;
  std::optional<std::uint64_t> seed;
  int port = 8080;
  bool stopwords = false;
  bool skip_degenerate = false;
};

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Failure{"io_error", "cannot write " + o.out};
  f << text;
  if (!f.flush()) throw Failure{"io_error", "cannot write " + o.out};
}

void write_file(const std::string& path, const char* text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text) || !f.flush()) throw Failure{"io_error", "cannot write " + path};
}

th_token_input parse_input(const std::string& s) {
  if (s == "entries") return TH_INPUT_ENTRIES;
  if (s == "terms") return TH_INPUT_TERMS;
  if (s == "definitions") return TH_INPUT_DEFINITIONS;
  usage("--input must be entries, terms or definitions");
}

th_alpha_metric parse_metric(const std::string& s) {
  if (s == "ordinal") return TH_ALPHA_ORDINAL;
  if (s == "interval") return TH_ALPHA_INTERVAL;
  usage("--metric must be ordinal or interval");
}

Corpus load_corpus(const std::string& path) {
  if (path.empty()) usage("--corpus is required");
  th_corpus* c = nullptr;
  check(th_corpus_load(path.c_str(), &c));
  return Corpus(c);
}

Dataset load_dataset(const std::string& path, const char* flag, const th_corpus* corpus) {
  if (path.empty()) usage(std::string(flag) + " is required");
  th_dataset* d = nullptr;
  check(th_dataset_load(path.c_str(), corpus, &d));
  return Dataset(d);
}

Vectors load_vectors(const std::string& path, const th_corpus* corpus) {
  if (path.empty()) usage("--vectors is required");
  th_vectors* v = nullptr;
  check(th_vectors_load(path.c_str(), corpus, &v));
  return Vectors(v);
}

// "uniform", "corpus" (entry-token frequencies), "text:PATH" (raw text to
// count) or a "token count" frequency file.
struct ProbSource {
  std::string name;
  Probs table;
};

ProbSource load_probs(const std::string& spec, const th_corpus* corpus) {
  if (spec.empty() || spec == "uniform") return {"uniform", nullptr};
  th_probs* p = nullptr;
  if (spec == "corpus") {
    check(th_probs_from_corpus(corpus, &p));
    return {"corpus", Probs(p)};
  }
  if (spec.starts_with("text:")) {
    const auto path = spec.substr(5);
    check(th_probs_load_text(path.c_str(), &p));
    return {std::filesystem::path(path).stem().string(), Probs(p)};
  }
  check(th_probs_load_counts(spec.c_str(), &p));
  return {std::filesystem::path(spec).stem().string(), Probs(p)};
}

th_embed_options embed_options(const Options& o) {
  th_embed_options e;
  th_embed_options_default(&e);
  e.a = o.a;
  e.d_pcr = o.pcr;
  e.input = parse_input(o.input);
  e.drop_stopwords = o.stopwords ? 1 : 0;
  return e;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// --------------------------------------------------------------------------

void cmd_embed(const Options& o) {
  auto corpus = load_corpus(o.corpus);
  auto vectors = load_vectors(o.vectors, corpus.get());
  auto probs = load_probs(o.probs.empty() ? "uniform" : o.probs.front(), corpus.get());
  const auto opts = embed_options(o);
  th_embedding* e = nullptr;
  check(th_embed(corpus.get(), vectors.get(), probs.table.get(), &opts, &e));
  Embedding emb(e);
  Text t;
  check(th_embedding_export(emb.get(), &t.p));
  emit(o, t.p);
}

Similarity similarity_for(const Options& o, const th_corpus* corpus, const th_vectors* vectors,
                          const th_probs* probs) {
  const auto opts = embed_options(o);
  th_embedding* e = nullptr;
  check(th_embed(corpus, vectors, probs, &opts, &e));
  Embedding emb(e);
  th_similarity* s = nullptr;
  check(th_similarity_compute(emb.get(), 1, &s));
  return Similarity(s);
}

void cmd_rank(const Options& o) {
  if (o.query.empty()) usage("--query is required");
  auto corpus = load_corpus(o.corpus);
  auto vectors = load_vectors(o.vectors, corpus.get());
  auto probs = load_probs(o.probs.empty() ? "uniform" : o.probs.front(), corpus.get());
  auto sim = similarity_for(o, corpus.get(), vectors.get(), probs.table.get());
  Text t;
  check(th_render_neighbors(sim.get(), corpus.get(), o.query.c_str(), o.top_k, &t.p));
  emit(o, t.p);
}

void cmd_evaluate(Options o, const std::vector<std::string>& explicit_flags) {
  auto given = [&](const char* flag) {
    return std::find(explicit_flags.begin(), explicit_flags.end(), flag) != explicit_flags.end();
  };
  if (!o.config.empty()) {
    th_run_config* rc = nullptr;
    check(th_run_config_load(o.config.c_str(), &rc));
    RunConfig cfg(rc);
    auto value = [&](const char* key) -> const char* { return th_run_config_value(cfg.get(), key); };
    // Command-line flags win over the file.
    if (auto v = value("a"); v && !given("--a")) o.a = std::stod(v);
    if (auto v = value("d_pcr"); v && !given("--pcr")) o.pcr = std::stoi(v);
    if (auto v = value("prob_source"); v && !given("--probs")) o.probs = {v};
    if (auto v = value("token_input"); v && !given("--input")) o.input = v;
    if (auto v = value("vectors_path"); v && !given("--vectors")) o.vectors = v;
    if (auto v = value("corpus_path"); v && !given("--corpus")) o.corpus = v;
    if (auto v = value("dataset_path"); v && !given("--dataset")) o.dataset = v;
  }
  auto corpus = load_corpus(o.corpus);
  auto dataset = load_dataset(o.dataset, "--dataset", corpus.get());
  auto vectors = load_vectors(o.vectors, corpus.get());
  auto probs = load_probs(o.probs.empty() ? "uniform" : o.probs.front(), corpus.get());
  const auto opts = embed_options(o);
  Text t;
  check(th_render_evaluation(corpus.get(), vectors.get(), probs.table.get(), probs.name.c_str(),
                             &opts, dataset.get(), &t.p));
  emit(o, t.p);
}

void cmd_sweep(const Options& o) {
  std::vector<double> a_values;
  std::vector<int> pcr_values;
  std::vector<th_token_input> inputs;
  if (o.grid != "default") {
    // "a=1e-4,1e-3;pcr=0,1;input=entries,terms"; missing axes keep their defaults.
    for (const auto& axis : split(o.grid, ';')) {
      const auto eq = axis.find('=');
      if (eq == std::string::npos) usage("bad --grid axis '" + axis + "'");
      const auto key = axis.substr(0, eq);
      const auto values = split(axis.substr(eq + 1), ',');
      if (values.empty()) usage("empty --grid axis '" + key + "'");
      try {
        for (const auto& v : values) {
          if (key == "a")
            a_values.push_back(std::stod(v));
          else if (key == "pcr")
            pcr_values.push_back(std::stoi(v));
          else if (key == "input")
            inputs.push_back(parse_input(v));
          else
            usage("unknown --grid axis '" + key + "'");
        }
      } catch (const std::logic_error&) {
        usage("bad value in --grid axis '" + key + "'");
      }
    }
  }
  auto corpus = load_corpus(o.corpus);
  auto dataset = load_dataset(o.dataset, "--dataset", corpus.get());
  auto vectors = load_vectors(o.vectors, corpus.get());
  std::vector<ProbSource> sources;
  for (const auto& spec : o.probs.empty() ? std::vector<std::string>{"uniform"} : o.probs)
    sources.push_back(load_probs(spec, corpus.get()));
  std::vector<const th_probs*> tables;
  std::vector<const char*> names;
  for (const auto& s : sources) {
    tables.push_back(s.table.get());
    names.push_back(s.name.c_str());
  }
  th_sweep_grid grid{};
  grid.sources = tables.data();
  grid.source_names = names.data();
  grid.n_sources = tables.size();
  if (!a_values.empty()) {
    grid.a_values = a_values.data();
    grid.n_a = a_values.size();
  }
  if (!pcr_values.empty()) {
    grid.d_pcr_values = pcr_values.data();
    grid.n_d_pcr = pcr_values.size();
  }
  if (!inputs.empty()) {
    grid.inputs = inputs.data();
    grid.n_inputs = inputs.size();
  }
  grid.drop_stopwords = o.stopwords ? 1 : 0;
  Text t;
  check(th_render_sweep(corpus.get(), vectors.get(), &grid, dataset.get(), &t.p));
  emit(o, t.p);
}

void cmd_agreement(const Options& o) {
  auto dataset = load_dataset(o.ratings, "--ratings", nullptr);
  Text t;
  check(th_render_agreement(dataset.get(), parse_metric(o.metric), &t.p));
  emit(o, t.p);
}

void cmd_assess(const Options& o) {
  auto dataset = load_dataset(o.ratings, "--ratings", nullptr);
  Text t;
  check(th_render_assessment(dataset.get(), o.controls.empty() ? nullptr : o.controls.c_str(),
                             parse_metric(o.metric), &t.p));
  emit(o, t.p);
}

void cmd_thresholds(const Options& o) {
  auto corpus = load_corpus(o.corpus);
  auto dataset = load_dataset(o.dataset, "--dataset", corpus.get());
  auto vectors = load_vectors(o.vectors, corpus.get());
  auto probs = load_probs(o.probs.empty() ? "uniform" : o.probs.front(), corpus.get());
  auto sim = similarity_for(o, corpus.get(), vectors.get(), probs.table.get());
  Text t;
  check(th_render_thresholds(sim.get(), dataset.get(), o.cutoff, &t.p));
  emit(o, t.p);
}

void cmd_candidates(const Options& o) {
  auto corpus = load_corpus(o.corpus);
  auto vectors = load_vectors(o.vectors, corpus.get());
  auto probs = load_probs(o.probs.empty() ? "uniform" : o.probs.front(), corpus.get());
  const auto opts = embed_options(o);
  th_candidate_thresholds thresholds;
  th_candidate_thresholds_default(&thresholds);
  Text t;
  check(th_render_candidates(corpus.get(), vectors.get(), probs.table.get(), &opts, &thresholds,
                             &t.p));
  emit(o, t.p);
}

Service open_service(const Options& o, bool need_codes) {
  auto corpus = load_corpus(o.corpus);
  auto pairs = load_dataset(o.dataset, "--dataset", corpus.get());
  const auto codes = split(o.codes, ',');
  if (need_codes && codes.empty()) usage("--codes is required");
  std::vector<const char*> code_ptrs;
  for (const auto& c : codes) code_ptrs.push_back(c.c_str());
  th_service_config cfg{};
  cfg.codes = code_ptrs.data();
  cfg.n_codes = code_ptrs.size();
  cfg.corpus = corpus.get();
  cfg.pairs = pairs.get();
  cfg.controls_path = o.controls.empty() ? nullptr : o.controls.c_str();
  cfg.seed = o.seed ? *o.seed : std::random_device{}() * 0x100000000ull + std::random_device{}();
  cfg.log_path = o.db.empty() ? nullptr : o.db.c_str();
  cfg.admin_token = o.admin_token.empty() ? nullptr : o.admin_token.c_str();
  th_service* s = nullptr;
  check(th_service_open(&cfg, &s));
  return Service(s);
}

void cmd_serve(const Options& o) {
  if (o.db.empty()) usage("--db is required");
  auto service = open_service(o, true);
  auto on_bound = [](int port, void* host) {
    std::cout << "listening\t" << static_cast<const char*>(host) << '\t' << port << std::endl;
  };
  check(th_service_serve(service.get(), o.host.c_str(), o.port, on_bound,
                         const_cast<char*>(o.host.c_str())));
}

void cmd_export(const Options& o) {
  if (o.db.empty()) usage("--db is required");
  if (o.out.empty() || o.controls_out.empty()) usage("--out and --controls-out are required");
  auto service = open_service(o, false);
  Text dataset, controls;
  check(th_service_export(service.get(), &dataset.p, &controls.p));
  write_file(o.out, dataset.p);
  write_file(o.controls_out, controls.p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Terminology harmonization: entry embeddings, similarity analysis and ratings"};
  app.require_subcommand(1);
  Options o;

  auto corpus = [&](CLI::App* c) { c->add_option("--corpus", o.corpus, "Entry corpus (TSV)"); };
  auto embedding = [&](CLI::App* c) {
    corpus(c);
    c->add_option("--vectors", o.vectors, "Word vectors (GloVe text, optionally .gz)");
    c->add_option("--probs", o.probs,
                  "Word probabilities: uniform, corpus, text:PATH or a 'token count' file");
    c->add_option("--a", o.a, "SIF parameter a")->check(CLI::PositiveNumber);
    c->add_option("--pcr", o.pcr, "Principal components to remove")->check(CLI::NonNegativeNumber);
    c->add_option("--input", o.input, "Token input")
        ->check(CLI::IsMember({"entries", "terms", "definitions"}));
    c->add_flag("--drop-stopwords", o.stopwords, "Drop function words before weighting");
  };
  auto out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output file (default stdout)"); };

  auto* embed = app.add_subcommand("embed", "Write entry embeddings");
  embedding(embed);
  out(embed);

  auto* rank = app.add_subcommand("rank", "Nearest entries for one entry");
  embedding(rank);
  rank->add_option("--query", o.query, "Entry id");
  rank->add_option("--top-k", o.top_k, "Neighbours to list")->check(CLI::PositiveNumber);
  out(rank);

  auto* evaluate = app.add_subcommand("evaluate", "Correlate similarities with median ratings");
  embedding(evaluate);
  evaluate->add_option("--dataset", o.dataset, "Rating dataset (TSV)");
  evaluate->add_option("--config", o.config, "key=value run configuration");
  out(evaluate);

  auto* sweep = app.add_subcommand("sweep", "Evaluate a grid of configurations");
  embedding(sweep);
  sweep->add_option("--dataset", o.dataset, "Rating dataset (TSV)");
  sweep->add_option("--grid", o.grid, "'default' or 'a=..;pcr=..;input=..'");
  out(sweep);

  auto* agreement = app.add_subcommand("agreement", "Inter-rater agreement");
  agreement->add_option("--ratings", o.ratings, "Rating dataset (TSV)");
  agreement->add_option("--metric", o.metric, "ordinal or interval")
      ->check(CLI::IsMember({"ordinal", "interval"}));
  out(agreement);

  auto* assess = app.add_subcommand("assess-raters", "Per-rater signals and exclusions");
  assess->add_option("--ratings", o.ratings, "Rating dataset (TSV)");
  assess->add_option("--controls", o.controls, "Control performance file");
  assess->add_option("--metric", o.metric, "ordinal or interval")
      ->check(CLI::IsMember({"ordinal", "interval"}));
  out(assess);

  auto* thresholds = app.add_subcommand("thresholds", "Rated pairs captured below a cut-off");
  embedding(thresholds);
  thresholds->add_option("--dataset", o.dataset, "Rating dataset (TSV)");
  thresholds->add_option("--cutoff", o.cutoff, "Similarity cut-off");
  out(thresholds);

  auto* candidates = app.add_subcommand("candidates", "Doublette and inconsistency candidates");
  embedding(candidates);
  out(candidates);

  auto service_flags = [&](CLI::App* c) {
    corpus(c);
    c->add_option("--dataset", o.dataset, "Dataset pairs to rate (TSV)");
    c->add_option("--controls", o.controls, "Control items (TSV)");
    c->add_option("--codes", o.codes, "Comma-separated recruitment codes");
    c->add_option("--db", o.db, "Event log");
    c->add_option("--seed", o.seed, "Base seed for item orders");
  };
  auto* serve = app.add_subcommand("serve", "Run the rating service");
  service_flags(serve);
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--admin-token", o.admin_token, "Token required for /export");

  auto* exp = app.add_subcommand("export", "Export collected ratings from an event log");
  service_flags(exp);
  exp->add_option("--out", o.out, "Dataset output");
  exp->add_option("--controls-out", o.controls_out, "Control performance output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error\tusage\t" << e.what() << '\n';
    return 2;
  }

  try {
    auto* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    std::vector<std::string> given;
    for (const auto* opt : cmd->get_options())
      if (opt->count() > 0) given.push_back(opt->get_name());
    if (name == "embed") cmd_embed(o);
    else if (name == "rank") cmd_rank(o);
    else if (name == "evaluate") cmd_evaluate(o, given);
    else if (name == "sweep") cmd_sweep(o);
    else if (name == "agreement") cmd_agreement(o);
    else if (name == "assess-raters") cmd_assess(o);
    else if (name == "thresholds") cmd_thresholds(o);
    else if (name == "candidates") cmd_candidates(o);
    else if (name == "serve") cmd_serve(o);
    else if (name == "export") cmd_export(o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error\tusage\t" << e.what() << '\n';
    return 2;
  } catch (const Failure& f) {
    std::cerr << "error\t" << f.code << '\t' << f.message << '\n';
    return 1;
  }
  return 0;
}
