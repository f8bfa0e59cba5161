#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "termharm/sif.hpp"
#include "termharm/termbase.hpp"

namespace termharm {

// Number of comparisons needed to check n entries pairwise: n(n-1)/2.
std::uint64_t pair_count(std::uint64_t n);

// Pairwise cosine similarities, stored as the strict upper triangle in row order.
class SimilarityMatrix {
 public:
  SimilarityMatrix(std::vector<std::string> ids, std::vector<double> upper);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t index_of(std::string_view id) const;  // throws NotFound
  bool contains(std::string_view id) const;

  // Symmetric access; the diagonal is 1 and not stored.
  double at(std::size_t i, std::size_t j) const;
  double get(std::string_view a, std::string_view b) const;

  std::span<const double> values() const { return values_; }

  // Entries left out because their embedding was degenerate.
  const std::vector<std::string>& filtered_ids() const { return filtered_; }
  void set_filtered_ids(std::vector<std::string> ids) { filtered_ = std::move(ids); }

 private:
  std::size_t offset(std::size_t i, std::size_t j) const;

  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> filtered_;
};

// Throws Undefined naming the entry when a row is degenerate.
SimilarityMatrix similarity_matrix(const EmbeddingMatrix& matrix);
// Drops degenerate rows first and lists them in filtered_ids().
SimilarityMatrix similarity_matrix_filtered(const EmbeddingMatrix& matrix);

void write_similarity_matrix(const SimilarityMatrix& matrix, std::ostream& out);

// Entry ids order numerically when both are digit strings, else lexicographically.
bool entry_id_less(std::string_view a, std::string_view b);

struct Neighbor {
  std::string entry_id;
  double similarity = 0.0;
};

// Top-k by descending similarity, ties by ascending id. When a corpus is given,
// a candidate whose term set equals that of an already listed neighbour is skipped.
std::vector<Neighbor> rank_neighbors(const SimilarityMatrix& matrix, const EntryCorpus* corpus,
                                     std::string_view entry_id, std::size_t k);

struct RatedComparison {
  std::string pair_id;
  std::string left_id;
  std::string right_id;
  MedianRating median;
};

// Dataset-kind pairs with at least one rating.
std::vector<RatedComparison> rated_comparisons(const RatingDataset& dataset);

struct ThresholdAnalysis {
  double cutoff = 0.0;
  std::size_t rated_in_matrix = 0;  // rated pairs whose entries are both in the matrix
  std::size_t rated_skipped = 0;    // rated pairs touching entries outside the matrix
  std::size_t selected_count = 0;   // rated pairs with s < cutoff
  std::array<std::size_t, kScaleSize> rated_per_category{};
  std::array<std::size_t, kScaleSize> captured_per_category{};
  std::uint64_t population = 0;           // all matrix pairs
  std::uint64_t population_selected = 0;  // matrix pairs with s < cutoff
  double population_fraction = 0.0;
};

// Categories are medians rounded half up.
ThresholdAnalysis threshold_analysis(const SimilarityMatrix& matrix,
                                     std::span<const RatedComparison> rated, double cutoff);

void write_threshold_analysis(const ThresholdAnalysis& analysis, std::ostream& out);

struct CandidateThresholds {
  double doublette = 0.9;       // entry similarity at or above
  double term_high = 0.9;       // term similarity at or above ...
  double definition_low = 0.4;  // ... while definition similarity at or below
};

enum CandidateFlag : unsigned {
  kDoubletteCandidate = 1u << 0,
  kInconsistencyCandidate = 1u << 1,
};

struct Candidate {
  std::string left_id;
  std::string right_id;
  double entry_similarity = 0.0;
  double term_similarity = 0.0;
  double definition_similarity = 0.0;
  unsigned flags = 0;
};

struct CandidateReport {
  CandidateThresholds thresholds;
  std::vector<Candidate> doublettes;       // by entry similarity, descending
  std::vector<Candidate> inconsistencies;  // by term - definition similarity, descending
};

// The three matrices must cover the same id set (in any order).
CandidateReport candidate_report(const SimilarityMatrix& entry_sim,
                                 const SimilarityMatrix& term_sim,
                                 const SimilarityMatrix& definition_sim,
                                 const CandidateThresholds& thresholds = {});

void write_candidate_report(const CandidateReport& report, const EntryCorpus* corpus,
                            std::ostream& out);

}  // namespace termharm
