#include "termharm/evalharness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <tuple>

#include "termharm/error.hpp"
#include "termharm/harmonizer.hpp"
#include "termharm/linalg.hpp"
#include "termharm/stats.hpp"
#include "text_util.hpp"

namespace termharm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, static_cast<std::size_t>(end - buf));
}

std::string format_percent(double rho) {
  return std::isfinite(rho) ? std::to_string(rho_percent(rho)) : "NA";
}

}  // namespace

EvaluationResult evaluate_matrix(const EmbeddingMatrix& matrix, const RatingDataset& dataset) {
  std::unordered_map<std::string, std::size_t> rows;
  std::size_t usable_rows = 0;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    rows.emplace(matrix.id(r), r);
    if (!matrix.degenerate(r) && norm(matrix.row(r)) > 0) ++usable_rows;
  }
  if (usable_rows == 0) fail(ErrorKind::Undefined, "every entry embedding is degenerate");

  EvaluationResult result;
  std::vector<double> cosines, medians;
  for (const auto& cmp : rated_comparisons(dataset)) {
    auto l = rows.find(cmp.left_id);
    auto r = rows.find(cmp.right_id);
    if (l == rows.end() || r == rows.end())
      fail(ErrorKind::NotFound, "pair " + cmp.pair_id + " names an entry outside the corpus");
    const auto lv = matrix.row(l->second);
    const auto rv = matrix.row(r->second);
    if (matrix.degenerate(l->second) || matrix.degenerate(r->second) || norm(lv) == 0 ||
        norm(rv) == 0) {
      ++result.skipped_pairs;
      continue;
    }
    cosines.push_back(cosine(lv, rv));
    medians.push_back(cmp.median.value());
  }
  result.n_pairs = cosines.size();
  result.rho = spearman_rho(cosines, medians);
  result.p_value = spearman_p_value(result.rho, result.n_pairs);
  return result;
}

EvaluationResult evaluate(const EntryCorpus& corpus, const WordVectorStore& store,
                          const ProbabilitySource& source, const EmbeddingConfig& config,
                          const RatingDataset& dataset) {
  for (const auto& p : dataset.pairs()) {
    if (p.kind != PairKind::Dataset) continue;
    for (const auto* id : {&p.left_id, &p.right_id})
      if (!corpus.contains(*id))
        fail(ErrorKind::NotFound, "pair " + p.pair_id + " names unknown entry " + *id);
  }
  EmbeddingConfig cfg = config;
  cfg.probabilities = source.table;
  auto result = evaluate_matrix(embed_corpus(corpus, store, cfg), dataset);
  result.source = source.name;
  result.a = cfg.a;
  result.d_pcr = cfg.d_pcr;
  result.token_input = cfg.token_input;
  return result;
}

std::vector<double> default_a_values() {
  std::vector<double> out;
  for (int i = 0; i <= 25; ++i) out.push_back(std::pow(10.0, -6.0 + i / 5.0));
  return out;
}

SweepGrid default_grid(std::vector<ProbabilitySource> sources) {
  SweepGrid grid;
  grid.a_values = default_a_values();
  grid.d_pcr_values = {0, 1, 2, 3, 4, 5, 6};
  grid.sources = std::move(sources);
  grid.token_inputs = {TokenInput::Entries, TokenInput::Terms, TokenInput::Definitions};
  return grid;
}

std::vector<EvaluationResult> sweep(const EntryCorpus& corpus, const WordVectorStore& store,
                                    const SweepGrid& grid, const RatingDataset& dataset,
                                    bool drop_stopwords) {
  if (grid.size() == 0) fail(ErrorKind::InvalidArgument, "sweep grid has an empty axis");
  const int max_pcr = *std::max_element(grid.d_pcr_values.begin(), grid.d_pcr_values.end());

  std::vector<EvaluationResult> results;
  results.reserve(grid.size());
  for (const auto& source : grid.sources) {
    for (const auto input : grid.token_inputs) {
      for (const double a : grid.a_values) {
        auto cell = [&](int d_pcr) {
          EvaluationResult r;
          r.source = source.name;
          r.a = a;
          r.d_pcr = d_pcr;
          r.token_input = input;
          return r;
        };
        EmbeddingConfig cfg;
        cfg.a = a;
        cfg.probabilities = source.table;
        cfg.token_input = input;
        cfg.drop_stopwords = drop_stopwords;

        // The directions of the weighted matrix are shared by every d_pcr cell.
        std::optional<EmbeddingMatrix> weighted;
        std::optional<PrincipalDirections> pcs;
        std::string setup_error;
        try {
          weighted = weighted_matrix(corpus, store, cfg);
          if (max_pcr > 0) pcs = principal_directions(*weighted, static_cast<std::size_t>(max_pcr));
        } catch (const Error& e) {
          setup_error = e.what();
        }

        for (const int d_pcr : grid.d_pcr_values) {
          auto r = cell(d_pcr);
          try {
            if (!weighted) fail(ErrorKind::InvalidArgument, setup_error);
            EmbeddingMatrix m = *weighted;
            if (d_pcr < 0) fail(ErrorKind::InvalidArgument, "d_pcr must be non-negative");
            if (d_pcr > 0) {
              if (pcs) {
                std::vector<std::vector<double>> dirs(pcs->directions.begin(),
                                                      pcs->directions.begin() + d_pcr);
                m = project_out(std::move(m), std::move(dirs));
              } else {
                m = remove_top_components(std::move(m), d_pcr);
              }
            }
            auto e = evaluate_matrix(m, dataset);
            r.rho = e.rho;
            r.p_value = e.p_value;
            r.n_pairs = e.n_pairs;
            r.skipped_pairs = e.skipped_pairs;
          } catch (const Error& e) {
            r.rho = kNaN;
            r.p_value = kNaN;
            r.error = e.what();
          }
          results.push_back(std::move(r));
        }
      }
    }
  }
  return results;
}

int rho_percent(double rho) { return static_cast<int>(std::lround(rho * 100.0)); }

void write_report(const std::vector<EvaluationResult>& results, std::ostream& out) {
  if (results.empty()) return;
  const auto key = [](const EvaluationResult& r) {
    return std::make_tuple(r.source, std::string(to_string(r.token_input)), r.a, r.d_pcr);
  };
  auto sorted = results;
  std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& x, const auto& y) {
    const bool fx = std::isfinite(x.rho), fy = std::isfinite(y.rho);
    if (fx != fy) return fx;
    if (fx && x.rho != y.rho) return x.rho > y.rho;
    return key(x) < key(y);
  });

  out << "prob_source\ttoken_input\ta\td_pcr\trho_x100\trho\tp_value\tn_pairs\tskipped\terror\n";
  for (const auto& r : sorted)
    out << r.source << '\t' << to_string(r.token_input) << '\t' << format_double(r.a) << '\t'
        << r.d_pcr << '\t' << format_percent(r.rho) << '\t' << format_double(r.rho) << '\t'
        << format_double(r.p_value) << '\t' << r.n_pairs << '\t' << r.skipped_pairs << '\t'
        << r.error << '\n';

  // Best cell per (source, input); `sorted` is already in descending rho order.
  std::vector<std::pair<std::string, std::string>> seen;
  out << "\n# maxima\nprob_source\ttoken_input\tbest_a\tbest_d_pcr\trho_x100\trho\n";
  std::vector<const EvaluationResult*> maxima;
  for (const auto& r : sorted) {
    if (!std::isfinite(r.rho)) continue;
    std::pair<std::string, std::string> k{r.source, std::string(to_string(r.token_input))};
    if (std::find(seen.begin(), seen.end(), k) != seen.end()) continue;
    seen.push_back(k);
    maxima.push_back(&r);
  }
  std::sort(maxima.begin(), maxima.end(), [&](const auto* x, const auto* y) {
    return std::make_pair(x->source, to_string(x->token_input)) <
           std::make_pair(y->source, to_string(y->token_input));
  });
  for (const auto* r : maxima)
    out << r->source << '\t' << to_string(r->token_input) << '\t' << format_double(r->a) << '\t'
        << r->d_pcr << '\t' << format_percent(r->rho) << '\t' << format_double(r->rho) << '\n';

  std::vector<int> pcrs;
  for (const auto& r : results)
    if (std::find(pcrs.begin(), pcrs.end(), r.d_pcr) == pcrs.end()) pcrs.push_back(r.d_pcr);
  if (pcrs.size() < 2) return;
  std::sort(pcrs.begin(), pcrs.end());
  out << "\n# best over a per d_pcr\nprob_source\ttoken_input\td_pcr\tbest_a\trho_x100\trho\n";
  std::vector<std::tuple<std::string, std::string, int>> done;
  std::vector<const EvaluationResult*> best;
  for (const auto& r : sorted) {
    if (!std::isfinite(r.rho)) continue;
    std::tuple<std::string, std::string, int> k{r.source, std::string(to_string(r.token_input)),
                                                r.d_pcr};
    if (std::find(done.begin(), done.end(), k) != done.end()) continue;
    done.push_back(k);
    best.push_back(&r);
  }
  std::sort(best.begin(), best.end(), [&](const auto* x, const auto* y) {
    return std::make_tuple(x->source, to_string(x->token_input), x->d_pcr) <
           std::make_tuple(y->source, to_string(y->token_input), y->d_pcr);
  });
  for (const auto* r : best)
    out << r->source << '\t' << to_string(r->token_input) << '\t' << r->d_pcr << '\t'
        << format_double(r->a) << '\t' << format_percent(r->rho) << '\t' << format_double(r->rho)
        << '\n';
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected key=value");
    const auto key = detail::trim(t.substr(0, eq));
    const std::string value(detail::trim(t.substr(eq + 1)));
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (key == "a") {
      const auto v = detail::parse_double(value);
      if (!v) fail(ErrorKind::Parse, where + "bad value for a");
      cfg.a = *v;
    } else if (key == "d_pcr") {
      const auto v = detail::parse_int(value);
      if (!v) fail(ErrorKind::Parse, where + "bad value for d_pcr");
      cfg.d_pcr = static_cast<int>(*v);
    } else if (key == "prob_source") {
      cfg.prob_source = value;
    } else if (key == "token_input") {
      if (!parse_token_input(value)) fail(ErrorKind::Parse, where + "bad token_input");
      cfg.token_input = value;
    } else if (key == "vectors_path") {
      cfg.vectors_path = value;
    } else if (key == "corpus_path") {
      cfg.corpus_path = value;
    } else if (key == "dataset_path") {
      cfg.dataset_path = value;
    } else {
      fail(ErrorKind::Parse, where + "unknown key '" + std::string(key) + "'");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  return parse_run_config(in);
}

}  // namespace termharm
