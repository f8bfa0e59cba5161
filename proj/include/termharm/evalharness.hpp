#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "termharm/sif.hpp"
#include "termharm/termbase.hpp"
#include "termharm/vecstore.hpp"

namespace termharm {

// A named word-probability estimate; a null table means uniform weights.
struct ProbabilitySource {
  std::string name;
  const WordProbabilityTable* table = nullptr;
};

struct EvaluationResult {
  std::string source;
  double a = 0.0;
  int d_pcr = 0;
  TokenInput token_input = TokenInput::Entries;
  double rho = 0.0;  // NaN when the cell failed
  double p_value = 1.0;
  std::size_t n_pairs = 0;
  std::size_t skipped_pairs = 0;  // pairs touching degenerate embeddings
  std::string error;              // non-empty when the cell failed
};

// Cosine of every rated dataset pair correlated (Spearman) with the unrounded
// median ratings. Throws NotFound for pairs naming entries outside the corpus
// and Undefined when every embedding is degenerate.
EvaluationResult evaluate(const EntryCorpus& corpus, const WordVectorStore& store,
                          const ProbabilitySource& source, const EmbeddingConfig& config,
                          const RatingDataset& dataset);

// Same, over an already embedded corpus.
EvaluationResult evaluate_matrix(const EmbeddingMatrix& matrix, const RatingDataset& dataset);

struct SweepGrid {
  std::vector<double> a_values;
  std::vector<int> d_pcr_values;
  std::vector<ProbabilitySource> sources;
  std::vector<TokenInput> token_inputs;

  std::size_t size() const {
    return a_values.size() * d_pcr_values.size() * sources.size() * token_inputs.size();
  }
};

// 26 log-spaced a values from 1e-6 to 1e-1 (five per decade).
std::vector<double> default_a_values();
// Default axes: a as above, d_pcr 0..6, all three token inputs.
SweepGrid default_grid(std::vector<ProbabilitySource> sources);

// One result per grid point, in grid order (source, input, a, d_pcr). Failing
// cells are reported with their error and the sweep continues.
std::vector<EvaluationResult> sweep(const EntryCorpus& corpus, const WordVectorStore& store,
                                    const SweepGrid& grid, const RatingDataset& dataset,
                                    bool drop_stopwords = false);

// rho * 100 rounded half away from zero.
int rho_percent(double rho);

// Tab-separated comparison table sorted by rho (descending), followed by the
// per-(source, input) maxima and, with more than one d_pcr value, the best rho
// per d_pcr.
void write_report(const std::vector<EvaluationResult>& results, std::ostream& out);

// Flat key=value run configuration.
struct RunConfig {
  std::optional<double> a;
  std::optional<int> d_pcr;
  std::optional<std::string> prob_source;
  std::optional<std::string> token_input;
  std::optional<std::string> vectors_path;
  std::optional<std::string> corpus_path;
  std::optional<std::string> dataset_path;
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

}  // namespace termharm
