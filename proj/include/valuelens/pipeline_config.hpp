#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "valuelens/analysis.hpp"
#include "valuelens/llm_client.hpp"
#include "valuelens/prompt_grid.hpp"
#include "valuelens/value_bank.hpp"
#include "valuelens/wvs_ingest.hpp"

namespace valuelens {

enum class Stage { gen_prompts, collect, score, project, ingest_wvs, compare, ablate, report };

inline constexpr Stage kAllStages[] = {Stage::gen_prompts, Stage::collect,    Stage::score,
                                       Stage::project,     Stage::ingest_wvs, Stage::compare,
                                       Stage::ablate,      Stage::report};

std::string_view to_string(Stage s);  // CLI spelling, e.g. "ingest-wvs"
Stage parse_stage(std::string_view s);

struct LlmSettings {
  std::string backend = "stub";  // stub | http
  std::string base_url;
  ApiStyle api_style = ApiStyle::completion;
  std::string api_key_env = "OPENAI_API_KEY";
  SamplingConfig sampling;
  std::size_t max_in_flight = 8;
  int max_attempts = 5;
  double requests_per_second = 0.0;
  int timeout_seconds = 60;
};

struct NliSettings {
  std::string backend = "stub";  // stub | http
  std::string url;
  std::string path = "/score";
  std::string model_version;
  std::size_t max_in_flight = 8;
  int max_attempts = 5;
  int timeout_seconds = 30;
};

struct RunConfig {
  std::filesystem::path source;  // the file this was read from
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> bank_path;  // unset: built-in bank
  ValueBank bank;
  LevelSets levels = LevelSets::defaults();
  LlmSettings llm;
  NliSettings nli;
  std::optional<std::filesystem::path> wvs_csv;
  WvsSchema wvs_schema = WvsSchema::wave7_defaults();
  AnalysisFilter analysis;
  std::optional<std::filesystem::path> figure_manifest;

  /// Effective configuration as YAML. Paths are absolute; the bank is
  /// referenced as bank.frozen.yaml next to the frozen file.
  std::string frozen_yaml() const;
  /// Short hash over everything that influences artifact content (not
  /// output_dir, not file locations; file contents enter by hash).
  std::string run_id() const;
  std::filesystem::path run_dir() const;
};

struct ConfigIssue {
  std::string path;  // dotted field path, e.g. "wvs.variables[2].column"
  std::string reason;
  int line = 0;  // 1-based, 0 if unknown

  std::string to_string(const std::filesystem::path& file) const;
};

struct ValidationResult {
  std::optional<RunConfig> config;  // set only when issues is empty
  std::vector<ConfigIssue> issues;

  bool ok() const { return issues.empty(); }
};

/// Parses and checks a config file. Every problem is reported, not just the
/// first. `stages` names the stages about to run; their dependencies (WVS
/// extract for ingest-wvs and compare, endpoints for http backends) are
/// checked too. Relative paths resolve against the config's directory.
ValidationResult validate_config(const std::filesystem::path& file,
                                 std::span<const Stage> stages = {});
ValidationResult validate_config_text(std::string_view yaml, const std::filesystem::path& source,
                                      std::span<const Stage> stages = {});

class ConfigError : public Error {
 public:
  ConfigError(const std::filesystem::path& file, std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// validate_config, throwing ConfigError when anything is wrong.
RunConfig load_config(const std::filesystem::path& file, std::span<const Stage> stages = {});

/// Writes config.frozen.yaml and bank.frozen.yaml into the run directory.
void freeze(const RunConfig& config);

}  // namespace valuelens
