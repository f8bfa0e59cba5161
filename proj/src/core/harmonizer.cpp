#include "termharm/harmonizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <set>

#include "termharm/error.hpp"
#include "termharm/linalg.hpp"

namespace termharm {

namespace {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, static_cast<std::size_t>(end - buf));
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::uint64_t pair_count(std::uint64_t n) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "pair count needs at least one entry");
  return n * (n - 1) / 2;
}

bool entry_id_less(std::string_view a, std::string_view b) {
  if (all_digits(a) && all_digits(b)) {
    const auto strip = [](std::string_view s) {
      while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
      return s;
    };
    const auto sa = strip(a), sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

// ---------------------------------------------------------------------------
// SimilarityMatrix

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> ids, std::vector<double> upper)
    : ids_(std::move(ids)), values_(std::move(upper)) {
  const std::uint64_t expected = ids_.empty() ? 0 : pair_count(ids_.size());
  if (values_.size() != expected)
    fail(ErrorKind::InvalidArgument, "similarity matrix needs " + std::to_string(expected) +
                                         " values, got " + std::to_string(values_.size()));
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (!index_.emplace(ids_[i], i).second) fail(ErrorKind::Duplicate, "duplicate id " + ids_[i]);
}

std::size_t SimilarityMatrix::offset(std::size_t i, std::size_t j) const {
  const std::size_t n = ids_.size();
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::size_t SimilarityMatrix::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) fail(ErrorKind::NotFound, "unknown entry " + std::string(id));
  return it->second;
}

bool SimilarityMatrix::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

double SimilarityMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) fail(ErrorKind::InvalidArgument, "index out of range");
  if (i == j) return 1.0;
  if (i > j) std::swap(i, j);
  return values_[offset(i, j)];
}

double SimilarityMatrix::get(std::string_view a, std::string_view b) const {
  return at(index_of(a), index_of(b));
}

SimilarityMatrix similarity_matrix(const EmbeddingMatrix& matrix) {
  const std::size_t n = matrix.rows();
  std::vector<double> norms(n);
  for (std::size_t r = 0; r < n; ++r) {
    norms[r] = norm(matrix.row(r));
    if (matrix.degenerate(r) || norms[r] == 0.0)
      fail(ErrorKind::Undefined, "degenerate embedding for entry " + matrix.id(r));
  }
  std::vector<double> upper;
  upper.reserve(n > 0 ? pair_count(n) : 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      upper.push_back(std::clamp(dot(matrix.row(i), matrix.row(j)) / (norms[i] * norms[j]), -1.0, 1.0));
  return SimilarityMatrix(matrix.ids(), std::move(upper));
}

SimilarityMatrix similarity_matrix_filtered(const EmbeddingMatrix& matrix) {
  std::vector<std::string> keep, dropped;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (matrix.degenerate(r) || norm(matrix.row(r)) == 0.0)
      dropped.push_back(matrix.id(r));
    else
      keep.push_back(matrix.id(r));
  }
  auto sim = similarity_matrix(matrix.subset(keep));
  sim.set_filtered_ids(std::move(dropped));
  return sim;
}

void write_similarity_matrix(const SimilarityMatrix& matrix, std::ostream& out) {
  const auto& ids = matrix.ids();
  std::size_t k = 0;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j)
      out << ids[i] << ' ' << ids[j] << ' ' << format_double(matrix.values()[k++]) << '\n';
}

// ---------------------------------------------------------------------------
// Rankings

std::vector<Neighbor> rank_neighbors(const SimilarityMatrix& matrix, const EntryCorpus* corpus,
                                     std::string_view entry_id, std::size_t k) {
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be at least 1");
  const std::size_t q = matrix.index_of(entry_id);
  std::vector<Neighbor> all;
  all.reserve(matrix.size());
  for (std::size_t j = 0; j < matrix.size(); ++j)
    if (j != q) all.push_back({matrix.ids()[j], matrix.at(q, j)});
  std::sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) {
    if (x.similarity != y.similarity) return x.similarity > y.similarity;
    return entry_id_less(x.entry_id, y.entry_id);
  });

  std::vector<Neighbor> out;
  std::set<std::set<std::string>> seen_terms;
  for (auto& n : all) {
    if (out.size() == k) break;
    if (corpus) {
      if (const auto* e = corpus->find(n.entry_id)) {
        std::set<std::string> terms(e->terms.begin(), e->terms.end());
        if (!seen_terms.insert(std::move(terms)).second) continue;
      }
    }
    out.push_back(std::move(n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Threshold analysis

std::vector<RatedComparison> rated_comparisons(const RatingDataset& dataset) {
  std::vector<RatedComparison> out;
  for (const auto& p : dataset.pairs()) {
    if (p.kind != PairKind::Dataset || dataset.ratings_of(p.pair_id).empty()) continue;
    out.push_back({p.pair_id, p.left_id, p.right_id, median_rating(dataset, p.pair_id)});
  }
  return out;
}

ThresholdAnalysis threshold_analysis(const SimilarityMatrix& matrix,
                                     std::span<const RatedComparison> rated, double cutoff) {
  ThresholdAnalysis out;
  out.cutoff = cutoff;
  for (const auto& r : rated) {
    if (!matrix.contains(r.left_id) || !matrix.contains(r.right_id)) {
      ++out.rated_skipped;
      continue;
    }
    const auto category = static_cast<std::size_t>(r.median.rounded());
    ++out.rated_in_matrix;
    ++out.rated_per_category[category];
    if (matrix.get(r.left_id, r.right_id) < cutoff) {
      ++out.selected_count;
      ++out.captured_per_category[category];
    }
  }
  out.population = matrix.values().size();
  for (double s : matrix.values())
    if (s < cutoff) ++out.population_selected;
  out.population_fraction =
      out.population ? static_cast<double>(out.population_selected) / static_cast<double>(out.population)
                     : 0.0;
  return out;
}

void write_threshold_analysis(const ThresholdAnalysis& a, std::ostream& out) {
  out << "cutoff\t" << format_double(a.cutoff) << '\n';
  out << "rated_pairs\t" << a.rated_in_matrix << '\n';
  out << "rated_pairs_skipped\t" << a.rated_skipped << '\n';
  out << "selected_rated_pairs\t" << a.selected_count << '\n';
  out << "population\t" << a.population << '\n';
  out << "population_selected\t" << a.population_selected << '\n';
  out << "population_fraction\t" << format_double(a.population_fraction) << '\n';
  out << "category\trated\tcaptured\n";
  for (int c = 0; c < kScaleSize; ++c)
    out << c << '\t' << a.rated_per_category[c] << '\t' << a.captured_per_category[c] << '\n';
}

// ---------------------------------------------------------------------------
// Candidates

CandidateReport candidate_report(const SimilarityMatrix& entry_sim,
                                 const SimilarityMatrix& term_sim,
                                 const SimilarityMatrix& definition_sim,
                                 const CandidateThresholds& thresholds) {
  const std::set<std::string> ids(entry_sim.ids().begin(), entry_sim.ids().end());
  for (const auto* m : {&term_sim, &definition_sim})
    if (std::set<std::string>(m->ids().begin(), m->ids().end()) != ids)
      fail(ErrorKind::InvalidArgument, "similarity matrices cover different entry sets");

  CandidateReport report;
  report.thresholds = thresholds;
  const auto& order = entry_sim.ids();
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      Candidate c;
      c.left_id = order[i];
      c.right_id = order[j];
      if (entry_id_less(c.right_id, c.left_id)) std::swap(c.left_id, c.right_id);
      c.entry_similarity = entry_sim.at(i, j);
      c.term_similarity = term_sim.get(c.left_id, c.right_id);
      c.definition_similarity = definition_sim.get(c.left_id, c.right_id);
      if (c.entry_similarity >= thresholds.doublette) c.flags |= kDoubletteCandidate;
      if (c.term_similarity >= thresholds.term_high &&
          c.definition_similarity <= thresholds.definition_low)
        c.flags |= kInconsistencyCandidate;
      if (c.flags & kDoubletteCandidate) report.doublettes.push_back(c);
      if (c.flags & kInconsistencyCandidate) report.inconsistencies.push_back(c);
    }
  }
  const auto by_ids = [](const Candidate& x, const Candidate& y) {
    if (x.left_id != y.left_id) return entry_id_less(x.left_id, y.left_id);
    return entry_id_less(x.right_id, y.right_id);
  };
  std::sort(report.doublettes.begin(), report.doublettes.end(),
            [&](const Candidate& x, const Candidate& y) {
              if (x.entry_similarity != y.entry_similarity)
                return x.entry_similarity > y.entry_similarity;
              return by_ids(x, y);
            });
  std::sort(report.inconsistencies.begin(), report.inconsistencies.end(),
            [&](const Candidate& x, const Candidate& y) {
              const double kx = x.term_similarity - x.definition_similarity;
              const double ky = y.term_similarity - y.definition_similarity;
              if (kx != ky) return kx > ky;
              return by_ids(x, y);
            });
  return report;
}

void write_candidate_report(const CandidateReport& report, const EntryCorpus* corpus,
                            std::ostream& out) {
  const auto& t = report.thresholds;
  out << "# cosine similarity of SIF embeddings stands in for an expert consistency judgement\n";
  out << "# thresholds are provisional: doublette >= " << format_double(t.doublette)
      << "; inconsistency: term >= " << format_double(t.term_high)
      << " and definition <= " << format_double(t.definition_low) << '\n';
  const auto terms_of = [&](const std::string& id) {
    std::string s;
    if (const auto* e = corpus ? corpus->find(id) : nullptr) {
      for (std::size_t i = 0; i < e->terms.size(); ++i) {
        if (i) s += '|';
        s += e->terms[i];
      }
    }
    return s;
  };
  out << "section\trank\tleft_id\tright_id\tentry_sim\tterm_sim\tdefinition_sim\tflags\tleft_terms\tright_terms\n";
  const auto section = [&](std::string_view name, const std::vector<Candidate>& list) {
    std::size_t rank = 0;
    for (const auto& c : list) {
      std::string flags;
      if (c.flags & kDoubletteCandidate) flags += "doublette";
      if (c.flags & kInconsistencyCandidate) flags += flags.empty() ? "inconsistency" : ",inconsistency";
      out << name << '\t' << ++rank << '\t' << c.left_id << '\t' << c.right_id << '\t'
          << format_double(c.entry_similarity) << '\t' << format_double(c.term_similarity) << '\t'
          << format_double(c.definition_similarity) << '\t' << flags << '\t' << terms_of(c.left_id)
          << '\t' << terms_of(c.right_id) << '\n';
    }
  };
  section("doublette", report.doublettes);
  section("inconsistency", report.inconsistencies);
}

}  // namespace termharm
