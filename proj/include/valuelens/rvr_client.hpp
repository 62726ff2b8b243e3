#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "valuelens/jsonl.hpp"
#include "valuelens/labels.hpp"
#include "valuelens/llm_client.hpp"
#include "valuelens/value_bank.hpp"

namespace valuelens {

/// Label of one premise under one hypothesis.
struct ScoreRecord {
  std::string premise_key;
  std::string prompt_id;
  int sample_index = 0;
  std::string dimension_id;
  Polarity polarity = Polarity::traditional;
  ResonanceLabel label = ResonanceLabel::neutral;
  std::string backend_name;

  bool operator==(const ScoreRecord&) const = default;
};

ordered_json to_json(const ScoreRecord& r);
/// Rejects labels outside {-1, 0, 1}.
ScoreRecord score_from_json(const json& j);
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);

/// Stable key for premise text.
std::string premise_key(std::string_view text);

class MalformedReplyError : public Error {
 public:
  using Error::Error;
};

class BackendUnavailableError : public Error {
 public:
  using Error::Error;
};

/// Maps an NLI wire reply {label, scores} to a resonance label.
///
/// `scores` is ordered [entailment, neutral, contradiction]. When present it
/// decides the class by argmax; a tie for the maximum resolves to neutral.
/// Without scores the `label` string is used. entailment -> +1,
/// contradiction -> -1, neutral -> 0. Anything else throws
/// MalformedReplyError.
ResonanceLabel label_from_reply(const json& reply);

/// NLI backend. classify() throws BackendUnavailableError for transient
/// failures and MalformedReplyError for unusable replies. Must be thread-safe.
class NliBackend {
 public:
  virtual ~NliBackend() = default;
  virtual ResonanceLabel classify(std::string_view premise, std::string_view hypothesis) = 0;
  virtual std::string name() const = 0;
  virtual std::string model_version() const = 0;
};

/// Offline backend driven by marker tokens in the premise ("[RES:god_t]",
/// "[CON:god_s]"). A premise identical to the hypothesis is entailment.
/// Anything else is neutral.
class StubNliBackend : public NliBackend {
 public:
  explicit StubNliBackend(const ValueBank& bank);

  /// The wire-format reply the stub would send; classify() decodes it with
  /// label_from_reply.
  json reply(std::string_view premise, std::string_view hypothesis) const;

  ResonanceLabel classify(std::string_view premise, std::string_view hypothesis) override;
  std::string name() const override { return "stub-nli"; }
  std::string model_version() const override { return "markers-v1"; }

 private:
  std::map<std::string, std::pair<std::string, Polarity>, std::less<>> hypotheses_;
};

struct HttpNliOptions {
  std::string base_url;  // e.g. "http://127.0.0.1:8008"
  std::string path = "/score";
  std::string model_version;
  std::chrono::milliseconds timeout{30'000};
};

/// POSTs {"premise", "hypothesis"} and decodes {"label", "scores"}.
class HttpNliBackend : public NliBackend {
 public:
  explicit HttpNliBackend(HttpNliOptions options);
  ResonanceLabel classify(std::string_view premise, std::string_view hypothesis) override;
  std::string name() const override { return "http-nli"; }
  std::string model_version() const override;

 private:
  HttpNliOptions options_;
};

/// Persistent label cache keyed by (premise, hypothesis, backend, model
/// version). Concurrent lookups; inserts are serialized and appended to disk.
class ScoreCache {
 public:
  ScoreCache() = default;  // memory only
  explicit ScoreCache(const std::filesystem::path& path);

  static std::string key(std::string_view premise_key, std::string_view hypothesis,
                         std::string_view backend_name, std::string_view model_version);

  std::optional<ResonanceLabel> lookup(const std::string& key) const;
  void insert(const std::string& key, ResonanceLabel label);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, ResonanceLabel> labels_;
  std::unique_ptr<JsonlWriter> writer_;
};

struct ScoreOptions {
  std::size_t max_in_flight = 8;
  RetryPolicy retry;
  Sleeper sleep = real_sleeper();
};

/// Raised when a single premise cannot be scored; the run continues.
class PremiseScoringError : public Error {
 public:
  enum class Kind { unreachable, malformed };
  PremiseScoringError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// One record per hypothesis, in hypothesis order. The cache is consulted
/// before the backend; new labels are written to it.
std::vector<ScoreRecord> score_premise(const PremiseRecord& premise,
                                       std::span<const HypothesisEntry> hypotheses,
                                       NliBackend& backend, ScoreCache* cache,
                                       const ScoreOptions& options = {});

struct ScoringReport {
  std::vector<ScoreRecord> records;  // premise order, then hypothesis order
  std::size_t premises_scored = 0;
  std::size_t failed_unreachable = 0;
  std::size_t failed_malformed = 0;
  std::size_t cache_hits = 0;
  std::size_t backend_calls = 0;
};

/// Scores every premise. Premises that fail are left out of `records`,
/// counted, and logged to `error_log` when given.
ScoringReport score_dataset(std::span<const PremiseRecord> premises,
                            std::span<const HypothesisEntry> hypotheses, NliBackend& backend,
                            ScoreCache* cache, JsonlWriter* error_log,
                            const ScoreOptions& options = {});

/// Non-neutral proportions for one hypothesis.
struct HypothesisTally {
  std::string dimension_id;
  Polarity polarity = Polarity::traditional;
  std::string hypothesis;
  std::size_t resonance = 0;
  std::size_t neutral = 0;
  std::size_t conflict = 0;

  std::size_t total() const { return resonance + neutral + conflict; }
  double resonance_fraction() const;
  double neutral_fraction() const;
  double conflict_fraction() const;
};

/// One tally per bank hypothesis, in hypothesis_pairs order. Records for
/// dimensions outside the bank throw.
std::vector<HypothesisTally> waterfall_stats(std::span<const ScoreRecord> scores,
                                             const ValueBank& bank, bool parallel = true);

}  // namespace valuelens
