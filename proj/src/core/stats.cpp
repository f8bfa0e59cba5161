#include "termharm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "termharm/error.hpp"

namespace termharm {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::InvalidArgument, "length mismatch");
  if (x.empty()) fail(ErrorKind::InvalidArgument, "empty input");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::Undefined, "correlation of a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    fail(ErrorKind::InvalidArgument, "length mismatch: " + std::to_string(x.size()) + " vs " +
                                         std::to_string(y.size()));
  if (x.size() < 3) fail(ErrorKind::InvalidArgument, "need at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double spearman_p_value(double rho, std::size_t n) {
  if (n < 3) return 1.0;
  const double df = static_cast<double>(n - 2);
  if (std::abs(rho) >= 1.0) return 0.0;
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

// ---------------------------------------------------------------------------

std::string_view to_string(AlphaMetric metric) {
  return metric == AlphaMetric::Ordinal ? "ordinal" : "interval";
}

std::optional<AlphaMetric> parse_alpha_metric(std::string_view name) {
  if (name == "ordinal") return AlphaMetric::Ordinal;
  if (name == "interval") return AlphaMetric::Interval;
  return std::nullopt;
}

double krippendorff_alpha(std::span<const std::vector<double>> units, AlphaMetric metric) {
  std::vector<double> values;
  std::size_t pairable_units = 0;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    ++pairable_units;
    values.insert(values.end(), u.begin(), u.end());
  }
  if (pairable_units < 2)
    fail(ErrorKind::Undefined, "insufficient data: need two items with at least two ratings");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t V = values.size();
  auto index_of = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) -
                                    values.begin());
  };

  // Coincidence matrix.
  std::vector<double> o(V * V, 0.0);
  std::vector<double> cnt(V);
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    std::fill(cnt.begin(), cnt.end(), 0.0);
    for (double v : u) cnt[index_of(v)] += 1.0;
    const double w = 1.0 / static_cast<double>(u.size() - 1);
    for (std::size_t c = 0; c < V; ++c) {
      if (cnt[c] == 0) continue;
      for (std::size_t k = 0; k < V; ++k) {
        const double pairs = c == k ? cnt[c] * (cnt[c] - 1) : cnt[c] * cnt[k];
        o[c * V + k] += pairs * w;
      }
    }
  }
  std::vector<double> marg(V, 0.0);
  for (std::size_t c = 0; c < V; ++c)
    for (std::size_t k = 0; k < V; ++k) marg[c] += o[c * V + k];
  const double n = std::accumulate(marg.begin(), marg.end(), 0.0);

  auto delta2 = [&](std::size_t c, std::size_t k) {
    if (metric == AlphaMetric::Interval) {
      const double d = values[c] - values[k];
      return d * d;
    }
    const auto [lo, hi] = std::minmax(c, k);
    double s = 0;
    for (std::size_t g = lo; g <= hi; ++g) s += marg[g];
    s -= (marg[c] + marg[k]) / 2.0;
    return s * s;
  };

  double observed = 0, expected = 0;
  for (std::size_t c = 0; c < V; ++c) {
    for (std::size_t k = 0; k < V; ++k) {
      if (c == k) continue;
      const double d = delta2(c, k);
      observed += o[c * V + k] * d;
      expected += marg[c] * marg[k] * d;
    }
  }
  if (expected == 0.0) fail(ErrorKind::Undefined, "no variation in the rating data");
  return 1.0 - (n - 1.0) * observed / expected;
}

double krippendorff_alpha(const RatingDataset& dataset, AlphaMetric metric) {
  std::vector<std::vector<double>> units;
  for (const auto& p : dataset.pairs()) {
    if (p.kind != PairKind::Dataset) continue;
    std::vector<double> u;
    for (const auto& [rater, v] : dataset.ratings_of(p.pair_id)) u.push_back(v);
    units.push_back(std::move(u));
  }
  return krippendorff_alpha(units, metric);
}

std::vector<std::vector<double>> shared_units(const RatingDataset& dataset,
                                              std::string_view rater_a,
                                              std::string_view rater_b) {
  std::vector<std::vector<double>> units;
  for (const auto& p : dataset.pairs()) {
    if (p.kind != PairKind::Dataset) continue;
    const auto& r = dataset.ratings_of(p.pair_id);
    auto a = r.find(rater_a);
    auto b = r.find(rater_b);
    if (a != r.end() && b != r.end())
      units.push_back({static_cast<double>(a->second), static_cast<double>(b->second)});
  }
  return units;
}

// ---------------------------------------------------------------------------

std::uint64_t ContingencyTable::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts)
    for (auto c : row) t += c;
  return t;
}

ContingencyTable contingency_table(const RatingDataset& dataset, std::string_view rater_a,
                                   std::string_view rater_b) {
  for (auto r : {rater_a, rater_b})
    if (!dataset.has_rater(r)) fail(ErrorKind::NotFound, "unknown rater " + std::string(r));
  ContingencyTable table;
  for (const auto& u : shared_units(dataset, rater_a, rater_b))
    ++table.counts[static_cast<std::size_t>(u[0])][static_cast<std::size_t>(u[1])];
  return table;
}

std::array<std::uint64_t, kScaleSize> pairwise_deviation_histogram(const ContingencyTable& table) {
  std::array<std::uint64_t, kScaleSize> hist{};
  for (int a = 0; a < kScaleSize; ++a)
    for (int b = 0; b < kScaleSize; ++b) hist[static_cast<std::size_t>(std::abs(a - b))] += table.counts[a][b];
  return hist;
}

BandedContingency cross_tabulate(const std::map<std::string, double>& reference,
                                 const std::map<std::string, MedianRating>& observed,
                                 std::optional<std::uint64_t> population) {
  BandedContingency out;
  bool any_shared = false;
  for (const auto& [pair, ref] : reference) {
    auto it = observed.find(pair);
    if (it == observed.end()) continue;
    any_shared = true;
    std::optional<Band> band;
    if (ref <= 2.0) band = Band::Dissimilar;
    if (ref >= 3.0) band = Band::Similar;
    if (!band) {
      ++out.excluded_midpoints;
      continue;
    }
    const int category = it->second.rounded();
    ++out.counts[static_cast<std::size_t>(*band)][static_cast<std::size_t>(category)];
    ++out.compared;
    if (*band == Band::Similar && category <= 2) ++out.under_rated;
    if (*band == Band::Dissimilar && category >= 3) ++out.over_rated;
  }
  if (!any_shared) fail(ErrorKind::InvalidArgument, "reference and observed share no pairs");
  out.population = population.value_or(out.compared);
  if (out.population > 0)
    out.reliable_share = static_cast<double>(out.compared - out.under_rated - out.over_rated) /
                         static_cast<double>(out.population);
  return out;
}

std::map<std::string, double> unanimous_reference(const RatingDataset& dataset,
                                                  std::span<const std::string> raters) {
  std::map<std::string, double> out;
  if (raters.empty()) return out;
  for (const auto& p : dataset.pairs()) {
    if (p.kind != PairKind::Dataset) continue;
    const auto& r = dataset.ratings_of(p.pair_id);
    std::optional<int> value;
    bool unanimous = true;
    for (const auto& rater : raters) {
      auto it = r.find(rater);
      if (it == r.end() || (value && *value != it->second)) {
        unanimous = false;
        break;
      }
      value = it->second;
    }
    if (unanimous && value) out.emplace(p.pair_id, *value);
  }
  return out;
}

std::map<std::string, MedianRating> medians_excluding(const RatingDataset& dataset,
                                                      std::span<const std::string> raters) {
  std::map<std::string, MedianRating> out;
  for (const auto& p : dataset.pairs()) {
    if (p.kind != PairKind::Dataset) continue;
    std::vector<int> values;
    for (const auto& [rater, v] : dataset.ratings_of(p.pair_id))
      if (std::find(raters.begin(), raters.end(), rater) == raters.end()) values.push_back(v);
    if (!values.empty()) out.emplace(p.pair_id, median_of(std::move(values)));
  }
  return out;
}

}  // namespace termharm
