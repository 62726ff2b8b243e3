#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "valuelens/jsonl.hpp"
#include "valuelens/llm_client.hpp"
#include "valuelens/pipeline_config.hpp"
#include "valuelens/rvr_client.hpp"

namespace valuelens {

/// Test seams. Unset members fall back to what the config asks for.
struct PipelineHooks {
  std::shared_ptr<CompletionBackend> llm;
  std::shared_ptr<NliBackend> nli;
  Sleeper sleep;
  std::function<std::string()> clock;
};

/// Fixed file names inside a run directory.
namespace artifacts {
inline constexpr const char* kPrompts = "prompts.jsonl";
inline constexpr const char* kPremises = "premises.jsonl";
inline constexpr const char* kCollectionFailures = "collection_failures.jsonl";
inline constexpr const char* kScores = "scores.jsonl";
inline constexpr const char* kScoreCache = "score_cache.jsonl";
inline constexpr const char* kScoringErrors = "scoring_errors.jsonl";
inline constexpr const char* kProjections = "projections.jsonl";
inline constexpr const char* kRespondents = "wvs_respondents.jsonl";
inline constexpr const char* kDropReport = "wvs_drop_report.json";
inline constexpr const char* kSummaries = "summaries.csv";
inline constexpr const char* kGroupMeans = "group_means.csv";
inline constexpr const char* kRegressionNation = "regression_nation.csv";
inline constexpr const char* kRegressionPooled = "regression_pooled.csv";
inline constexpr const char* kFitTable = "fit_table.csv";
inline constexpr const char* kCompareDiagnostics = "compare_diagnostics.json";
inline constexpr const char* kAblationSummaries = "ablation_summaries.csv";
inline constexpr const char* kAblationVariance = "ablation_variance.csv";
}  // namespace artifacts

/// Runs stages against one run directory. Each stage reads its inputs from
/// earlier stages' files, writes its own, and returns a JSON summary of
/// counts. Every stage refreezes the config first.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config, PipelineHooks hooks = {});

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }
  std::filesystem::path path(const char* artifact) const { return run_dir_ / artifact; }

  ordered_json run(Stage stage);
  /// Every stage in order; WVS stages are skipped when no extract is set.
  ordered_json run_all();

  ordered_json gen_prompts();
  ordered_json collect();
  ordered_json score();
  ordered_json project();
  ordered_json ingest_wvs();
  ordered_json compare();
  ordered_json ablate();
  ordered_json report();

 private:
  std::vector<PromptRecord> load_prompts() const;
  std::map<std::string, PromptRecord> prompt_index() const;
  void require(const char* artifact, Stage producer) const;

  RunConfig config_;
  PipelineHooks hooks_;
  std::filesystem::path run_dir_;
};

}  // namespace valuelens
