#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "valuelens/labels.hpp"
#include "valuelens/projection.hpp"
#include "valuelens/wvs_ingest.hpp"

namespace valuelens {

class AnalysisError : public Error {
 public:
  using Error::Error;
};

enum class Source { llm, wvs };
std::string_view to_string(Source s);

enum class Slice { nation, age, sex };
std::string_view to_string(Slice s);
Slice parse_slice(std::string_view s);

/// Demographic group; fields outside the slice are empty.
struct GroupKey {
  std::optional<std::string> nation;
  std::optional<std::string> age_bracket;
  std::optional<std::string> sex;

  bool full() const { return nation && age_bracket && sex; }
  std::string label() const;
  auto operator<=>(const GroupKey&) const = default;
};

struct Observation {
  GroupKey key;
  double value = 0.0;
};

/// Selection applied to LLM projections before comparison. The defaults
/// keep combined-mode projections of general-prompt premises from full
/// <age, nationality, sex> personas.
struct AnalysisFilter {
  bool general_prompt_only = true;
  bool full_triple_only = true;
  ProjectionMode mode = ProjectionMode::combined;
  std::vector<std::string> nations;  // empty keeps every nation
};

std::vector<Observation> llm_observations(std::span<const PremiseProjection> projections,
                                          const AnalysisFilter& filter);
std::vector<Observation> wvs_observations(std::span<const WvsRespondent> respondents,
                                          const AnalysisFilter& filter);

/// Box-and-whisker statistics.
///
/// Quartiles use the median-of-halves convention: for odd n the median is
/// excluded from both halves, so {-2,-1,0,1,2} gives q1 = -1.5, q3 = 1.5.
/// Whiskers reach the most extreme observations within 1.5 IQR of the
/// quartiles.
struct BoxStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::size_t outliers = 0;
};

BoxStats box_stats(std::vector<double> values);

/// Sample variance (n - 1 denominator); 0 for fewer than two values.
double sample_variance(std::span<const double> values);

struct GroupSummary {
  GroupKey key;
  Source source = Source::llm;
  BoxStats stats;
};

/// One summary per group present in `observations`, ordered by group key.
/// Observations that lack the slice field are ignored. Levels listed in
/// `expected_levels` with no observations produce a warning and no row.
std::vector<GroupSummary> summarize(std::span<const Observation> observations, Source source,
                                    Slice slice, std::span<const std::string> expected_levels = {},
                                    std::vector<std::string>* warnings = nullptr);

struct GroupMeanRow {
  GroupKey key;
  std::size_t n_wvs = 0;
  std::size_t n_llm = 0;
  double mean_wvs = 0.0;
  double mean_llm = 0.0;
};

struct GroupMeansResult {
  std::vector<GroupMeanRow> rows;          // ordered by key
  std::vector<GroupKey> missing_llm;       // present in WVS only
  std::vector<GroupKey> missing_wvs;       // present in LLM only
};

/// Pairs per-group means over full <nation, age bracket, sex> keys. Throws
/// AnalysisError when the two sources share no group.
GroupMeansResult group_means(std::span<const Observation> llm, std::span<const Observation> wvs);

/// Simple OLS of mean_wvs on mean_llm within one nation.
struct RegressionFit {
  std::string nation;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rmse = 0.0;  // sqrt(SSR / n)
  double p_value = 1.0;  // F-test of the slope
  std::size_t n_groups = 0;
  bool degenerate = false;
  std::string diagnostic;
};

/// Shared slope with one intercept per nation.
struct PooledFit {
  double slope = 0.0;
  std::vector<std::pair<std::string, double>> nation_intercepts;
  double r_squared = 0.0;
  double rmse = 0.0;
  double slope_p_value = 1.0;  // two-sided t-test
  std::size_t n_groups = 0;
  bool degenerate = false;
  std::string diagnostic;
};

struct FixedEffectsResult {
  PooledFit pooled;
  std::vector<RegressionFit> nations;  // ordered by nation
};

/// Per-nation OLS plus the pooled dummy-intercept model. Nations with fewer
/// than three groups, or without variation in mean_llm, are flagged
/// degenerate (R^2 = 0, p = 1) and left out of the pooled fit.
FixedEffectsResult fixed_effects_regression(std::span<const GroupMeanRow> rows);

/// "***" below 0.001, "**" below 0.01, "*" below 0.05, otherwise empty.
std::string significance_stars(double p);

struct AblationSeries {
  ProjectionMode mode = ProjectionMode::combined;
  std::vector<double> values;  // aligned with AblationResult::subjects
  double variance = 0.0;
};

struct AblationResult {
  std::vector<std::string> subjects;  // "<prompt_id>#<sample_index>"
  std::vector<AblationSeries> series;  // traditional_only, secular_only, combined
  /// Per mode, per slice (nation, age, sex) summaries over the same premises.
  std::vector<std::pair<ProjectionMode, GroupSummary>> summaries;
};

/// Projects identical premises in all three modes. Throws AnalysisError if any
/// premise lacks a polarity score.
AblationResult ablate(std::span<const ScoreRecord> scores, const ValueBank& bank,
                      const std::map<std::string, PromptRecord>& prompts,
                      const AnalysisFilter& filter);

// CSV tables ----------------------------------------------------------------

std::string summaries_csv(std::span<const GroupSummary> rows);
std::string group_means_csv(std::span<const GroupMeanRow> rows);
std::vector<GroupMeanRow> parse_group_means_csv(const std::string& text);
std::string regression_csv(std::span<const RegressionFit> fits);
std::vector<RegressionFit> parse_regression_csv(const std::string& text);
std::string pooled_csv(const PooledFit& fit);
/// Nations as columns, RMSE and starred R^2 as rows.
std::string fit_table_csv(std::span<const RegressionFit> fits);
std::string ablation_summaries_csv(std::span<const std::pair<ProjectionMode, GroupSummary>> rows);
std::string ablation_variance_csv(const AblationResult& result);

}  // namespace valuelens
