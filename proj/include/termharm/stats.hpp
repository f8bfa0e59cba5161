#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "termharm/termbase.hpp"

namespace termharm {

// Average (fractional) ranks, 1-based; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

// Tie-corrected Spearman correlation: Pearson correlation of average ranks.
// Throws InvalidArgument for unequal lengths or fewer than 3 observations and
// Undefined when either side is constant.
double spearman_rho(std::span<const double> x, std::span<const double> y);

// Two-sided p-value from the t approximation t = rho * sqrt((n-2)/(1-rho^2)).
double spearman_p_value(double rho, std::size_t n);

// ---------------------------------------------------------------------------
// Krippendorff's alpha

enum class AlphaMetric { Ordinal, Interval };

std::string_view to_string(AlphaMetric metric);
std::optional<AlphaMetric> parse_alpha_metric(std::string_view name);

// One unit (item) holds the values assigned to it by the raters who rated it;
// units with fewer than two values are not pairable and are ignored. Values may
// be any reals (e.g. half-point medians); the ordinal metric ranks the distinct
// observed values.
// Throws Undefined with fewer than two pairable units, or when the pairable
// values show no variation at all.
double krippendorff_alpha(std::span<const std::vector<double>> units, AlphaMetric metric);

// Over dataset-kind pairs, all raters.
double krippendorff_alpha(const RatingDataset& dataset, AlphaMetric metric);

// Units for two raters over the dataset pairs both rated.
std::vector<std::vector<double>> shared_units(const RatingDataset& dataset,
                                              std::string_view rater_a,
                                              std::string_view rater_b);

// ---------------------------------------------------------------------------
// Contingency analysis

// counts[a][b]: pairs rated a by the first rater and b by the second.
struct ContingencyTable {
  std::array<std::array<std::uint64_t, kScaleSize>, kScaleSize> counts{};

  std::uint64_t total() const;
};

ContingencyTable contingency_table(const RatingDataset& dataset, std::string_view rater_a,
                                   std::string_view rater_b);

// Cell sums grouped by |a - b|.
std::array<std::uint64_t, kScaleSize> pairwise_deviation_histogram(const ContingencyTable& table);

// Reference bands: value <= 2 is "dissimilar", value >= 3 is "similar";
// values strictly between (e.g. an averaged 2.5) are left out and counted.
enum class Band { Dissimilar = 0, Similar = 1 };

struct BandedContingency {
  // counts[band][observed category]; observed medians are rounded half up.
  std::array<std::array<std::uint64_t, kScaleSize>, 2> counts{};
  std::uint64_t under_rated = 0;  // similar reference, observed 0-2
  std::uint64_t over_rated = 0;   // dissimilar reference, observed 3-4
  std::uint64_t compared = 0;
  std::uint64_t excluded_midpoints = 0;
  std::uint64_t population = 0;
  double reliable_share = 0.0;  // (compared - under - over) / population
};

// `population` defaults to the number of compared pairs.
BandedContingency cross_tabulate(const std::map<std::string, double>& reference,
                                 const std::map<std::string, MedianRating>& observed,
                                 std::optional<std::uint64_t> population = std::nullopt);

// Pairs on which every rater in `raters` gave the same rating (all must have rated).
std::map<std::string, double> unanimous_reference(const RatingDataset& dataset,
                                                  std::span<const std::string> raters);
// Medians over the remaining raters, for pairs with at least one such rating.
std::map<std::string, MedianRating> medians_excluding(const RatingDataset& dataset,
                                                      std::span<const std::string> raters);

}  // namespace termharm
