#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "termharm/stats.hpp"
#include "termharm/termbase.hpp"

namespace termharm {

// One answer to a control ("easy") pair with a known intended rating.
struct ControlRating {
  std::string rater_id;
  std::string pair_id;
  int intended = 0;
  int rating = 0;

  int deviation() const { return rating > intended ? rating - intended : intended - rating; }
};

// Ratings of control-kind pairs found in the dataset itself.
std::vector<ControlRating> control_ratings_from(const RatingDataset& dataset);

// Reads the control-performance export:
//   rater_id <TAB> pair_id <TAB> intended_rating <TAB> rating <TAB> deviation
std::vector<ControlRating> load_control_ratings(const std::string& path);

struct RaterReport {
  std::string rater_id;
  double alpha_vs_others_median = 0.0;  // NaN when undefined
  double avg_pairwise_spearman = 0.0;   // NaN when undefined
  std::size_t strong_agreement_count = 0;
  std::size_t control_deviations_ge2 = 0;
  bool candidate = false;  // below mean - 1 SD on both agreement signals
  bool excluded = false;   // candidate confirmed by the secondary criteria
};

struct AssessmentOptions {
  AlphaMetric metric = AlphaMetric::Ordinal;
  double strong_agreement_alpha = 0.7;
  int control_deviation = 2;
};

// Per-rater signals over dataset pairs, sorted by rater id, with the
// exclusion protocol applied. Throws InvalidArgument with fewer than 3 raters.
std::vector<RaterReport> assess_raters(const RatingDataset& dataset,
                                       std::span<const ControlRating> controls,
                                       const AssessmentOptions& options = {});

// Flags candidates and exclusions from already computed signals. A rater is a
// candidate when both agreement signals lie more than one population standard
// deviation below their means; the exclusion is confirmed when the candidate
// also has the minimal strong-agreement count and at least one large control
// deviation.
void apply_exclusion_protocol(std::vector<RaterReport>& reports);

// Mean Spearman correlation over all rater pairs with a defined correlation.
double average_pairwise_spearman(const RatingDataset& dataset);

struct ExclusionEffect {
  double alpha_before = 0.0;
  double alpha_after = 0.0;
  double spearman_before = 0.0;
  double spearman_after = 0.0;
};

ExclusionEffect exclusion_effect(const RatingDataset& dataset, std::string_view rater_id,
                                 AlphaMetric metric = AlphaMetric::Ordinal);

// Overall alpha, then one row per rater pair: shared items, pairwise alpha and
// Spearman, and counts of absolute rating differences 0..4.
void write_agreement_report(const RatingDataset& dataset, AlphaMetric metric, std::ostream& out);

// Per-rater signals and flags, then the effect of dropping each excluded rater.
void write_rater_assessment(const RatingDataset& dataset, const std::vector<RaterReport>& reports,
                            AlphaMetric metric, std::ostream& out);

}  // namespace termharm
