#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "valuelens/jsonl.hpp"
#include "valuelens/prompt_grid.hpp"
#include "valuelens/retry.hpp"

namespace valuelens {

struct SamplingConfig {
  int max_tokens = 200;
  double temperature = 1.0;
  double top_p = 0.5;
  int samples_per_prompt = 50;
  std::string model_name = "text-davinci-003";

  /// Throws Error naming the first out-of-range field.
  void validate() const;
};

/// One sampled completion with its provenance.
struct PremiseRecord {
  std::string prompt_id;
  int sample_index = 0;
  std::string text;
  std::string model_name;
  std::string collected_at;
  DemographicProfile profile;
  std::string dimension_id;
};

ordered_json to_json(const PremiseRecord& r);
PremiseRecord premise_from_json(const json& j);
std::vector<PremiseRecord> read_premises(const std::filesystem::path& path);

enum class CompletionStatus { ok, transport_error, auth_error, quota_exhausted };

struct CompletionResult {
  CompletionStatus status = CompletionStatus::ok;
  std::string text;
  std::string detail;
  std::optional<std::chrono::milliseconds> retry_after;
};

/// Text-completion backend. Implementations must be safe to call from
/// several threads at once.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResult complete(const PromptRecord& prompt, int sample_index,
                                    const SamplingConfig& cfg) = 0;
  virtual std::string name() const = 0;
};

/// Marker tokens understood by the stub NLI backend: "[RES:god_t]",
/// "[CON:abortion_s]".
std::string resonance_marker(std::string_view dimension_id, Polarity p);
std::string conflict_marker(std::string_view dimension_id, Polarity p);

/// Offline backend. Text is a pure function of (seed, prompt id, sample
/// index, persona) and embeds stub-NLI marker tokens, with a traditional
/// lean that varies by nationality, age and sex.
class StubCompletionBackend : public CompletionBackend {
 public:
  explicit StubCompletionBackend(std::vector<std::string> dimension_ids, std::uint64_t seed = 0);

  CompletionResult complete(const PromptRecord& prompt, int sample_index,
                            const SamplingConfig& cfg) override;
  std::string name() const override { return "stub-llm"; }

  /// Probability in [0.05, 0.95] that a dimension leans traditional.
  static double traditional_lean(const DemographicProfile& profile);

 private:
  std::vector<std::string> dimension_ids_;
  std::uint64_t seed_;
};

enum class ApiStyle { completion, chat };

struct HttpCompletionOptions {
  std::string base_url;  // e.g. "https://api.openai.com/v1"
  ApiStyle style = ApiStyle::completion;
  std::string api_key;
  std::chrono::milliseconds timeout{60'000};
};

/// OpenAI-style JSON completion API: POST {base}/completions or
/// {base}/chat/completions.
class HttpCompletionBackend : public CompletionBackend {
 public:
  explicit HttpCompletionBackend(HttpCompletionOptions options);

  CompletionResult complete(const PromptRecord& prompt, int sample_index,
                            const SamplingConfig& cfg) override;
  std::string name() const override;

 private:
  HttpCompletionOptions options_;
};

/// Append-only premise dataset on disk, keyed by (prompt_id, sample_index).
class PremiseStore {
 public:
  explicit PremiseStore(const std::filesystem::path& path);

  bool contains(const std::string& prompt_id, int sample_index) const;
  /// Returns false (and writes nothing) if the key is already present.
  bool append(const PremiseRecord& record);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::set<std::pair<std::string, int>> keys_;
  std::unique_ptr<JsonlWriter> writer_;
};

class AuthenticationError : public Error {
 public:
  using Error::Error;
};

struct CollectOptions {
  std::size_t max_in_flight = 8;
  RetryPolicy retry;
  double requests_per_second = 0.0;
  Sleeper sleep = real_sleeper();
  std::function<std::string()> clock = [] { return utc_timestamp(); };
};

struct CollectReport {
  std::size_t requested = 0;
  std::size_t already_present = 0;
  std::size_t collected = 0;
  std::size_t failed = 0;
};

/// Samples cfg.samples_per_prompt completions for each prompt into `store`,
/// skipping pairs already present. Empty completions and exhausted retries
/// go to `failure_log` (if given), never into the store. Authentication
/// failures abort the run with AuthenticationError; records written before
/// that point are kept.
CollectReport collect(std::span<const PromptRecord> prompts, const SamplingConfig& cfg,
                      CompletionBackend& backend, PremiseStore& store, JsonlWriter* failure_log,
                      const CollectOptions& options = {});

}  // namespace valuelens
