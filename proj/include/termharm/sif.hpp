#pragma once

// Smooth-inverse-frequency entry embeddings: weighted token averages followed by
// removal of the top principal directions of the (uncentered) embedding matrix.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "termharm/termbase.hpp"
#include "termharm/tokenize.hpp"
#include "termharm/vecstore.hpp"

namespace termharm {

struct EmbeddingConfig {
  double a = 1e-3;
  // nullptr selects uniform weights (the unweighted-average baseline).
  const WordProbabilityTable* probabilities = nullptr;
  int d_pcr = 0;
  TokenInput token_input = TokenInput::Entries;
  bool drop_stopwords = false;
};

// Throws InvalidArgument for a <= 0 or d_pcr < 0.
void validate(const EmbeddingConfig& config);

// a / (a + p). Throws InvalidArgument for a <= 0 or p outside [0, 1].
double sif_weight(double a, double p);

struct EntryEmbedding {
  std::string entry_id;
  std::vector<double> vector;
  std::size_t token_count = 0;  // in-vocabulary tokens that contributed
  std::size_t oov_count = 0;

  bool degenerate() const { return token_count == 0; }
};

// Lookup rule shared by vectors and probabilities: exact case first, then the
// ASCII-lowercased form.
std::span<const float> lookup_vector(const WordVectorStore& store, std::string_view token);
double lookup_probability(const WordProbabilityTable& table, std::string_view token);

// Mean over in-vocabulary tokens of sif_weight(a, p(w)) * vec(w). With no
// in-vocabulary token the result is the zero vector, flagged degenerate.
EntryEmbedding weighted_average_embedding(std::span<const std::string> bag,
                                          const WordVectorStore& store,
                                          const WordProbabilityTable* table, double a);

class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(std::size_t dimension) : dimension_(dimension) {}

  void add_row(const EntryEmbedding& embedding);
  void add_row(std::string id, std::span<const double> values, std::size_t token_count);

  std::size_t rows() const { return ids_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t row) const { return ids_[row]; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * dimension_, dimension_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * dimension_, dimension_}; }
  std::size_t token_count(std::size_t r) const { return token_counts_[r]; }
  bool degenerate(std::size_t r) const { return token_counts_[r] == 0; }
  std::vector<std::string> degenerate_ids() const;
  std::size_t row_index(std::string_view id) const;  // throws NotFound

  // Directions subtracted by the last remove_top_components, unit and orthogonal.
  const std::vector<std::vector<double>>& removed_components() const { return removed_; }
  void set_removed_components(std::vector<std::vector<double>> components) {
    removed_ = std::move(components);
  }

  // Copy keeping only rows whose ids are in `keep` (in this matrix's order).
  EmbeddingMatrix subset(std::span<const std::string> keep) const;

 private:
  std::size_t dimension_;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::vector<std::size_t> token_counts_;
  std::vector<std::vector<double>> removed_;
};

struct PrincipalDirections {
  std::vector<std::vector<double>> directions;  // top-k, sign-canonical
  std::vector<double> singular_values;          // of the top-k directions
  std::size_t rank = 0;                         // numerical rank of the matrix
};

// Top-k right singular directions of the row matrix (eigenvectors of X^T X).
// The first component above 1e-12 in magnitude of each direction is positive.
// Throws InvalidArgument naming the rank when k exceeds it.
PrincipalDirections principal_directions(const EmbeddingMatrix& matrix, std::size_t k);

// Replaces every row v by v - sum_k u_k u_k^T v and records the directions.
EmbeddingMatrix project_out(EmbeddingMatrix matrix, std::vector<std::vector<double>> directions);

EmbeddingMatrix remove_top_components(EmbeddingMatrix matrix, int d_pcr);

// Throws Undefined when either vector is zero.
double cosine(std::span<const double> x, std::span<const double> y);

// Weighted averages for every corpus entry in corpus order, before any
// principal-component removal.
EmbeddingMatrix weighted_matrix(const EntryCorpus& corpus, const WordVectorStore& store,
                                const EmbeddingConfig& config);

// weighted_matrix followed by remove_top_components(config.d_pcr).
// Degenerate entries stay in the matrix as zero rows; see degenerate_ids().
EmbeddingMatrix embed_corpus(const EntryCorpus& corpus, const WordVectorStore& store,
                             const EmbeddingConfig& config);

// "entry_id v1 ... vd" lines, shortest round-trip formatting.
void write_embedding_matrix(const EmbeddingMatrix& matrix, std::ostream& out);

}  // namespace termharm
