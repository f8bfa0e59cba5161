#include "termharm/raters.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "termharm/error.hpp"
#include "text_util.hpp"

namespace termharm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Spearman over the dataset pairs both raters rated; NaN when undefined.
double pair_spearman(const RatingDataset& dataset, std::string_view a, std::string_view b) {
  std::vector<double> x, y;
  for (const auto& u : shared_units(dataset, a, b)) {
    x.push_back(u[0]);
    y.push_back(u[1]);
  }
  try {
    return spearman_rho(x, y);
  } catch (const Error&) {
    return kNaN;
  }
}

double pair_alpha(const RatingDataset& dataset, std::string_view a, std::string_view b,
                  AlphaMetric metric) {
  try {
    return krippendorff_alpha(shared_units(dataset, a, b), metric);
  } catch (const Error&) {
    return kNaN;
  }
}

struct MeanSd {
  double mean = kNaN;
  double sd = kNaN;
};

MeanSd population_stats(const std::vector<double>& values) {
  std::vector<double> finite;
  for (double v : values)
    if (std::isfinite(v)) finite.push_back(v);
  if (finite.empty()) return {};
  const double n = static_cast<double>(finite.size());
  const double mean = std::accumulate(finite.begin(), finite.end(), 0.0) / n;
  double ss = 0;
  for (double v : finite) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

std::string fmt(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

std::vector<ControlRating> control_ratings_from(const RatingDataset& dataset) {
  std::vector<ControlRating> out;
  for (const auto& p : dataset.pairs()) {
    if (p.kind != PairKind::Control) continue;
    for (const auto& [rater, v] : dataset.ratings_of(p.pair_id))
      out.push_back({rater, p.pair_id, *p.intended_rating, v});
  }
  return out;
}

std::vector<ControlRating> load_control_ratings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::vector<ControlRating> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line_no == 1 && line.starts_with("rater_id\t")) continue;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, '\t');
    if (f.size() < 4)
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected at least 4 fields");
    const auto intended = detail::parse_int(detail::trim(f[2]));
    const auto rating = detail::parse_int(detail::trim(f[3]));
    if (!intended || !rating || !in_scale(static_cast<int>(*intended)) ||
        !in_scale(static_cast<int>(*rating)))
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": rating outside 0-4");
    out.push_back({std::string(detail::trim(f[0])), std::string(detail::trim(f[1])),
                   static_cast<int>(*intended), static_cast<int>(*rating)});
  }
  return out;
}

void apply_exclusion_protocol(std::vector<RaterReport>& reports) {
  std::vector<double> alphas, rhos;
  for (const auto& r : reports) {
    alphas.push_back(r.alpha_vs_others_median);
    rhos.push_back(r.avg_pairwise_spearman);
  }
  const auto a = population_stats(alphas);
  const auto s = population_stats(rhos);
  std::size_t min_strong = std::numeric_limits<std::size_t>::max();
  for (const auto& r : reports) min_strong = std::min(min_strong, r.strong_agreement_count);

  for (auto& r : reports) {
    r.candidate = std::isfinite(r.alpha_vs_others_median) && std::isfinite(r.avg_pairwise_spearman) &&
                  std::isfinite(a.mean) && std::isfinite(s.mean) &&
                  r.alpha_vs_others_median < a.mean - a.sd &&
                  r.avg_pairwise_spearman < s.mean - s.sd;
    r.excluded = r.candidate && r.strong_agreement_count == min_strong &&
                 r.control_deviations_ge2 >= 1;
  }
}

std::vector<RaterReport> assess_raters(const RatingDataset& dataset,
                                       std::span<const ControlRating> controls,
                                       const AssessmentOptions& options) {
  const auto raters = dataset.raters();
  if (raters.size() < 3)
    fail(ErrorKind::InvalidArgument,
         "rater assessment needs at least 3 raters, got " + std::to_string(raters.size()));

  std::vector<RaterReport> reports;
  for (const auto& rater : raters) {
    RaterReport rep;
    rep.rater_id = rater;

    std::vector<std::vector<double>> units;
    for (const auto& p : dataset.pairs()) {
      if (p.kind != PairKind::Dataset) continue;
      const auto& ratings = dataset.ratings_of(p.pair_id);
      auto own = ratings.find(rater);
      if (own == ratings.end()) continue;
      std::vector<int> others;
      for (const auto& [other, v] : ratings)
        if (other != rater) others.push_back(v);
      if (others.empty()) continue;
      units.push_back({static_cast<double>(own->second), median_of(std::move(others)).value()});
    }
    try {
      rep.alpha_vs_others_median = krippendorff_alpha(units, options.metric);
    } catch (const Error&) {
      rep.alpha_vs_others_median = kNaN;
    }

    double rho_sum = 0;
    std::size_t rho_n = 0;
    for (const auto& other : raters) {
      if (other == rater) continue;
      if (const double rho = pair_spearman(dataset, rater, other); std::isfinite(rho)) {
        rho_sum += rho;
        ++rho_n;
      }
      if (pair_alpha(dataset, rater, other, options.metric) > options.strong_agreement_alpha)
        ++rep.strong_agreement_count;
    }
    rep.avg_pairwise_spearman = rho_n ? rho_sum / static_cast<double>(rho_n) : kNaN;

    for (const auto& c : controls)
      if (c.rater_id == rater && c.deviation() >= options.control_deviation)
        ++rep.control_deviations_ge2;
    reports.push_back(std::move(rep));
  }
  apply_exclusion_protocol(reports);
  return reports;
}

double average_pairwise_spearman(const RatingDataset& dataset) {
  const auto raters = dataset.raters();
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < raters.size(); ++i)
    for (std::size_t j = i + 1; j < raters.size(); ++j)
      if (const double rho = pair_spearman(dataset, raters[i], raters[j]); std::isfinite(rho)) {
        sum += rho;
        ++n;
      }
  if (n == 0) fail(ErrorKind::Undefined, "no rater pair with a defined Spearman correlation");
  return sum / static_cast<double>(n);
}

ExclusionEffect exclusion_effect(const RatingDataset& dataset, std::string_view rater_id,
                                 AlphaMetric metric) {
  const auto reduced = dataset.without_rater(rater_id);
  ExclusionEffect out;
  out.alpha_before = krippendorff_alpha(dataset, metric);
  out.alpha_after = krippendorff_alpha(reduced, metric);
  out.spearman_before = average_pairwise_spearman(dataset);
  out.spearman_after = average_pairwise_spearman(reduced);
  return out;
}

void write_agreement_report(const RatingDataset& dataset, AlphaMetric metric, std::ostream& out) {
  const auto raters = dataset.raters();
  std::size_t items = 0;
  for (const auto& p : dataset.pairs())
    if (p.kind == PairKind::Dataset && !dataset.ratings_of(p.pair_id).empty()) ++items;
  out << "metric\t" << to_string(metric) << '\n';
  out << "alpha\t" << fmt(krippendorff_alpha(dataset, metric)) << '\n';
  out << "raters\t" << raters.size() << '\n';
  out << "items\t" << items << "\n\n";
  out << "rater_a\trater_b\tshared\talpha\tspearman\tdelta0\tdelta1\tdelta2\tdelta3\tdelta4\n";
  for (std::size_t i = 0; i < raters.size(); ++i) {
    for (std::size_t j = i + 1; j < raters.size(); ++j) {
      const auto table = contingency_table(dataset, raters[i], raters[j]);
      if (table.total() == 0) continue;
      out << raters[i] << '\t' << raters[j] << '\t' << table.total() << '\t'
          << fmt(pair_alpha(dataset, raters[i], raters[j], metric)) << '\t'
          << fmt(pair_spearman(dataset, raters[i], raters[j]));
      for (auto c : pairwise_deviation_histogram(table)) out << '\t' << c;
      out << '\n';
    }
  }
}

void write_rater_assessment(const RatingDataset& dataset, const std::vector<RaterReport>& reports,
                            AlphaMetric metric, std::ostream& out) {
  out << "rater_id\talpha_vs_others_median\tavg_pairwise_spearman\tstrong_agreements"
         "\tcontrol_deviations_ge2\tcandidate\texcluded\n";
  for (const auto& r : reports)
    out << r.rater_id << '\t' << fmt(r.alpha_vs_others_median) << '\t'
        << fmt(r.avg_pairwise_spearman) << '\t' << r.strong_agreement_count << '\t'
        << r.control_deviations_ge2 << '\t' << (r.candidate ? "yes" : "no") << '\t'
        << (r.excluded ? "yes" : "no") << '\n';
  bool header = false;
  for (const auto& r : reports) {
    if (!r.excluded) continue;
    if (!header) {
      out << "\nexcluded_rater\talpha_before\talpha_after\tspearman_before\tspearman_after\n";
      header = true;
    }
    const auto e = exclusion_effect(dataset, r.rater_id, metric);
    out << r.rater_id << '\t' << fmt(e.alpha_before) << '\t' << fmt(e.alpha_after) << '\t'
        << fmt(e.spearman_before) << '\t' << fmt(e.spearman_after) << '\n';
  }
}

}  // namespace termharm
