#include "termharm/termbase.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "termharm/error.hpp"
#include "text_util.hpp"

namespace termharm {

namespace {

std::string at_line(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  return in;
}

}  // namespace

// ---------------------------------------------------------------------------
// EntryCorpus

void EntryCorpus::add(TerminologicalEntry entry) {
  if (entry.id.empty()) fail(ErrorKind::InvalidArgument, "entry id is empty");
  std::erase_if(entry.terms, [](const std::string& t) { return detail::trim(t).empty(); });
  if (entry.terms.empty())
    fail(ErrorKind::InvalidArgument, "entry " + entry.id + " has no terms");
  if (detail::trim(entry.definition).empty())
    fail(ErrorKind::InvalidArgument, "entry " + entry.id + " has an empty definition");
  if (index_.contains(entry.id)) fail(ErrorKind::Duplicate, "duplicate entry id " + entry.id);
  index_.emplace(entry.id, entries_.size());
  entries_.push_back(std::move(entry));
}

const TerminologicalEntry* EntryCorpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const TerminologicalEntry& EntryCorpus::at(std::string_view id) const {
  const auto* e = find(id);
  if (!e) fail(ErrorKind::NotFound, "unknown entry id " + std::string(id));
  return *e;
}

EntryCorpus parse_entry_corpus(std::istream& in) {
  EntryCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line_no == 1 && line.starts_with("id\t")) continue;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 4)
      fail(ErrorKind::Parse, at_line(line_no) + "expected 4 tab-separated fields, got " +
                                 std::to_string(fields.size()));
    TerminologicalEntry entry;
    entry.id = std::string(detail::trim(fields[0]));
    for (auto term : detail::split(fields[1], '|')) {
      term = detail::trim(term);
      if (!term.empty()) entry.terms.emplace_back(term);
    }
    entry.definition = std::string(fields[2]);
    entry.source = std::string(fields[3]);
    try {
      corpus.add(std::move(entry));
    } catch (const Error& e) {
      fail(e.kind(), at_line(line_no) + e.what());
    }
  }
  return corpus;
}

EntryCorpus load_entry_corpus(const std::string& path) {
  auto in = open_input(path);
  return parse_entry_corpus(in);
}

void write_entry_corpus(const EntryCorpus& corpus, std::ostream& out) {
  out << "id\tterms\tdefinition\tsource\n";
  for (const auto& e : corpus.entries()) {
    out << e.id << '\t';
    for (std::size_t i = 0; i < e.terms.size(); ++i) {
      if (i) out << '|';
      out << e.terms[i];
    }
    out << '\t' << e.definition << '\t' << e.source << '\n';
  }
}

// ---------------------------------------------------------------------------
// Scale and medians

std::span<const ScaleCategory> rating_scale() {
  static constexpr std::array<ScaleCategory, kScaleSize> kScale{{
      {4, "Very similar", "Sehr ähnlich", "midday-noon, motherboard-mainboard"},
      {3, "Similar", "Ähnlich", "lion-zebra, firefighter-policeman"},
      {2, "Slightly similar", "Etwas ähnlich", "house-window, airplane-pilot"},
      {1, "Dissimilar", "Unähnlich", "software-keyboard, driver-suspension"},
      {0, "Totally dissimilar and unrelated", "Vollkommen unähnlich und nicht zusammenhängend",
       "pencil-frog, PlayStation-monarchy"},
  }};
  return kScale;
}

MedianRating median_of(std::vector<int> ratings) {
  if (ratings.empty()) fail(ErrorKind::Undefined, "median of an unrated pair");
  std::sort(ratings.begin(), ratings.end());
  const std::size_t n = ratings.size();
  if (n % 2 == 1) return MedianRating::from_half_points(2 * ratings[n / 2]);
  return MedianRating::from_half_points(ratings[n / 2 - 1] + ratings[n / 2]);
}

// ---------------------------------------------------------------------------
// RatingDataset

std::string_view to_string(PairKind kind) {
  return kind == PairKind::Dataset ? "dataset" : "control";
}

bool RatingPair::same_entries(const RatingPair& other) const {
  return (left_id == other.left_id && right_id == other.right_id) ||
         (left_id == other.right_id && right_id == other.left_id);
}

void RatingDataset::add_pair(RatingPair pair) {
  if (pair.pair_id.empty()) fail(ErrorKind::InvalidArgument, "pair id is empty");
  if (pair.left_id == pair.right_id)
    fail(ErrorKind::InvalidArgument, "pair " + pair.pair_id + " compares an entry with itself");
  if (pair.kind == PairKind::Control && !pair.intended_rating)
    fail(ErrorKind::InvalidArgument, "control pair " + pair.pair_id + " lacks an intended rating");
  if (pair.kind == PairKind::Dataset && pair.intended_rating)
    fail(ErrorKind::InvalidArgument, "dataset pair " + pair.pair_id + " has an intended rating");
  if (pair.intended_rating && !in_scale(*pair.intended_rating))
    fail(ErrorKind::InvalidArgument, "intended rating outside 0-4 for pair " + pair.pair_id);

  if (auto it = index_.find(pair.pair_id); it != index_.end()) {
    const auto& existing = pairs_[it->second];
    if (existing.left_id != pair.left_id || existing.right_id != pair.right_id ||
        existing.kind != pair.kind || existing.intended_rating != pair.intended_rating)
      fail(ErrorKind::Duplicate, "conflicting definitions of pair " + pair.pair_id);
    return;
  }
  index_.emplace(pair.pair_id, pairs_.size());
  pairs_.push_back(std::move(pair));
  ratings_.emplace_back();
}

std::size_t RatingDataset::index_of(std::string_view pair_id) const {
  auto it = index_.find(std::string(pair_id));
  if (it == index_.end()) fail(ErrorKind::NotFound, "unknown pair id " + std::string(pair_id));
  return it->second;
}

void RatingDataset::add_rating(std::string_view pair_id, const std::string& rater_id,
                               int category) {
  const std::size_t idx = index_of(pair_id);
  if (rater_id.empty()) fail(ErrorKind::InvalidArgument, "rater id is empty");
  if (!in_scale(category))
    fail(ErrorKind::InvalidArgument,
         "rating " + std::to_string(category) + " outside 0-4 for pair " + std::string(pair_id));
  auto& slot = ratings_[idx];
  if (slot.contains(rater_id))
    fail(ErrorKind::Duplicate,
         "duplicate rating by " + rater_id + " for pair " + std::string(pair_id));
  slot.emplace(rater_id, category);
  ++rater_counts_[rater_id];
}

const RatingPair* RatingDataset::find_pair(std::string_view pair_id) const {
  auto it = index_.find(std::string(pair_id));
  return it == index_.end() ? nullptr : &pairs_[it->second];
}

const RatingPair& RatingDataset::pair(std::string_view pair_id) const {
  return pairs_[index_of(pair_id)];
}

std::vector<std::string> RatingDataset::raters() const {
  std::vector<std::string> out;
  out.reserve(rater_counts_.size());
  for (const auto& [id, count] : rater_counts_) out.push_back(id);
  return out;
}

bool RatingDataset::has_rater(std::string_view rater_id) const {
  return rater_counts_.find(rater_id) != rater_counts_.end();
}

std::optional<int> RatingDataset::rating(std::string_view pair_id,
                                         std::string_view rater_id) const {
  const auto& slot = ratings_[index_of(pair_id)];
  auto it = slot.find(rater_id);
  if (it == slot.end()) return std::nullopt;
  return it->second;
}

const std::map<std::string, int, std::less<>>& RatingDataset::ratings_of(
    std::string_view pair_id) const {
  return ratings_[index_of(pair_id)];
}

std::size_t RatingDataset::rating_count() const {
  std::size_t n = 0;
  for (const auto& slot : ratings_) n += slot.size();
  return n;
}

RatingDataset RatingDataset::filtered(PairKind kind) const {
  RatingDataset out;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (pairs_[i].kind != kind) continue;
    out.add_pair(pairs_[i]);
    for (const auto& [rater, value] : ratings_[i]) out.add_rating(pairs_[i].pair_id, rater, value);
  }
  return out;
}

RatingDataset RatingDataset::without_rater(std::string_view rater_id) const {
  if (!has_rater(rater_id)) fail(ErrorKind::NotFound, "unknown rater " + std::string(rater_id));
  RatingDataset out;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    out.add_pair(pairs_[i]);
    for (const auto& [rater, value] : ratings_[i])
      if (rater != rater_id) out.add_rating(pairs_[i].pair_id, rater, value);
  }
  return out;
}

RatingDataset parse_rating_dataset(std::istream& in, const EntryCorpus* corpus) {
  RatingDataset dataset;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line_no == 1 && line.starts_with("pair_id\t")) continue;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 7)
      fail(ErrorKind::Parse, at_line(line_no) + "expected 7 tab-separated fields, got " +
                                 std::to_string(f.size()));
    RatingPair pair;
    pair.pair_id = std::string(detail::trim(f[0]));
    pair.left_id = std::string(detail::trim(f[1]));
    pair.right_id = std::string(detail::trim(f[2]));
    const auto kind = detail::trim(f[3]);
    if (kind == "dataset") {
      pair.kind = PairKind::Dataset;
    } else if (kind == "control") {
      pair.kind = PairKind::Control;
    } else {
      fail(ErrorKind::Parse, at_line(line_no) + "unknown pair kind '" + std::string(kind) + "'");
    }
    if (const auto intended = detail::trim(f[4]); !intended.empty()) {
      const auto v = detail::parse_int(intended);
      if (!v) fail(ErrorKind::Parse, at_line(line_no) + "bad intended rating");
      pair.intended_rating = static_cast<int>(*v);
    }
    if (corpus && pair.kind == PairKind::Dataset) {
      for (const auto* id : {&pair.left_id, &pair.right_id})
        if (!corpus->contains(*id))
          fail(ErrorKind::NotFound, at_line(line_no) + "unknown entry id " + *id);
    }
    const std::string rater(detail::trim(f[5]));
    const auto rating_text = detail::trim(f[6]);
    try {
      const std::string pair_id = pair.pair_id;
      dataset.add_pair(std::move(pair));
      if (rater.empty() != rating_text.empty())
        fail(ErrorKind::Parse, "rater id and rating must both be present or both empty");
      if (!rater.empty()) {
        const auto v = detail::parse_int(rating_text);
        if (!v) fail(ErrorKind::Parse, "bad rating '" + std::string(rating_text) + "'");
        if (!in_scale(static_cast<int>(*v)))
          fail(ErrorKind::InvalidArgument, "rating " + std::string(rating_text) + " outside 0-4");
        dataset.add_rating(pair_id, rater, static_cast<int>(*v));
      }
    } catch (const Error& e) {
      fail(e.kind(), at_line(line_no) + e.what());
    }
  }
  return dataset;
}

RatingDataset load_rating_dataset(const std::string& path, const EntryCorpus* corpus) {
  auto in = open_input(path);
  return parse_rating_dataset(in, corpus);
}

void write_rating_dataset(const RatingDataset& dataset, std::ostream& out) {
  out << "pair_id\tleft_id\tright_id\tkind\tintended_rating\trater_id\trating\n";
  for (const auto& p : dataset.pairs()) {
    const auto prefix = [&] {
      out << p.pair_id << '\t' << p.left_id << '\t' << p.right_id << '\t' << to_string(p.kind)
          << '\t';
      if (p.intended_rating) out << *p.intended_rating;
      out << '\t';
    };
    const auto& ratings = dataset.ratings_of(p.pair_id);
    if (ratings.empty()) {
      prefix();
      out << "\t\n";
      continue;
    }
    for (const auto& [rater, value] : ratings) {
      prefix();
      out << rater << '\t' << value << '\n';
    }
  }
}

MedianRating median_rating(const RatingDataset& dataset, std::string_view pair_id) {
  const auto& ratings = dataset.ratings_of(pair_id);
  if (ratings.empty()) fail(ErrorKind::Undefined, "pair " + std::string(pair_id) + " is unrated");
  std::vector<int> values;
  values.reserve(ratings.size());
  for (const auto& [rater, v] : ratings) values.push_back(v);
  return median_of(std::move(values));
}

}  // namespace termharm
