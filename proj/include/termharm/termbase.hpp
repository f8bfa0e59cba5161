#pragma once

// Data model for terminological entries and similarity-rating datasets.
//
// Entry corpus file (UTF-8, tab separated, one record per line):
//   id <TAB> term1|term2|... <TAB> definition <TAB> source
// Rating dataset file (one line per (pair, rater)):
//   pair_id <TAB> left_id <TAB> right_id <TAB> kind <TAB> intended <TAB> rater_id <TAB> rating
// Both formats accept an optional header line ("id\t..." / "pair_id\t...").

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace termharm {

struct TerminologicalEntry {
  std::string id;
  std::vector<std::string> terms;
  std::string definition;
  std::string source;
};

class EntryCorpus {
 public:
  // Validates the entry and rejects duplicate ids.
  void add(TerminologicalEntry entry);

  const TerminologicalEntry* find(std::string_view id) const;
  const TerminologicalEntry& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Insertion (file) order.
  const std::vector<TerminologicalEntry>& entries() const { return entries_; }

 private:
  std::vector<TerminologicalEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

EntryCorpus load_entry_corpus(const std::string& path);
EntryCorpus parse_entry_corpus(std::istream& in);
// Writes the canonical form: header line, LF endings, terms joined by '|'.
void write_entry_corpus(const EntryCorpus& corpus, std::ostream& out);

// ---------------------------------------------------------------------------
// Rating scale

inline constexpr int kScaleMin = 0;
inline constexpr int kScaleMax = 4;
inline constexpr int kScaleSize = 5;

struct ScaleCategory {
  int value;
  std::string_view label_en;
  std::string_view label_de;
  std::string_view examples;  // two everyday word pairs illustrating the category
};

// Ordered from 4 (very similar) down to 0 (unrelated).
std::span<const ScaleCategory> rating_scale();

constexpr bool in_scale(int category) { return category >= kScaleMin && category <= kScaleMax; }

// Median of integer ratings on the five-point scale, kept exact in half points.
class MedianRating {
 public:
  static MedianRating from_half_points(int half_points) { return MedianRating(half_points); }

  int half_points() const { return half_points_; }
  double value() const { return half_points_ / 2.0; }
  bool is_half() const { return half_points_ % 2 != 0; }
  // Report-boundary rounding: x.5 goes up.
  int rounded() const { return (half_points_ + 1) / 2; }

  friend bool operator==(MedianRating, MedianRating) = default;
  friend auto operator<=>(MedianRating, MedianRating) = default;

 private:
  explicit MedianRating(int half_points) : half_points_(half_points) {}
  int half_points_;
};

// Throws Undefined on an empty rating list.
MedianRating median_of(std::vector<int> ratings);

// ---------------------------------------------------------------------------
// Rating dataset

enum class PairKind { Dataset, Control };

std::string_view to_string(PairKind kind);

struct RatingPair {
  std::string pair_id;
  std::string left_id;
  std::string right_id;
  PairKind kind = PairKind::Dataset;
  std::optional<int> intended_rating;  // present iff kind == Control

  // Unordered: (x, y) names the same comparison as (y, x).
  bool same_entries(const RatingPair& other) const;
};

class RatingDataset {
 public:
  // Re-adding an identical pair is a no-op; a conflicting redefinition throws.
  void add_pair(RatingPair pair);
  void add_rating(std::string_view pair_id, const std::string& rater_id, int category);

  const std::vector<RatingPair>& pairs() const { return pairs_; }
  const RatingPair* find_pair(std::string_view pair_id) const;
  const RatingPair& pair(std::string_view pair_id) const;

  // Sorted rater ids.
  std::vector<std::string> raters() const;
  bool has_rater(std::string_view rater_id) const;

  std::optional<int> rating(std::string_view pair_id, std::string_view rater_id) const;
  // Ratings of one pair keyed by rater id.
  const std::map<std::string, int, std::less<>>& ratings_of(std::string_view pair_id) const;
  std::size_t rating_count() const;

  // Copy restricted to one pair kind / without one rater.
  RatingDataset filtered(PairKind kind) const;
  RatingDataset without_rater(std::string_view rater_id) const;

 private:
  std::size_t index_of(std::string_view pair_id) const;

  std::vector<RatingPair> pairs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::map<std::string, int, std::less<>>> ratings_;
  std::map<std::string, std::size_t, std::less<>> rater_counts_;
};

// corpus may be null; when given, every dataset-kind pair must reference known entries.
RatingDataset load_rating_dataset(const std::string& path, const EntryCorpus* corpus = nullptr);
RatingDataset parse_rating_dataset(std::istream& in, const EntryCorpus* corpus = nullptr);
void write_rating_dataset(const RatingDataset& dataset, std::ostream& out);

MedianRating median_rating(const RatingDataset& dataset, std::string_view pair_id);

}  // namespace termharm
