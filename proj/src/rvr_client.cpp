#include "valuelens/rvr_client.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <algorithm>

#include "valuelens/http_transport.hpp"
#include "valuelens/kernels.hpp"

namespace valuelens {

ordered_json to_json(const ScoreRecord& r) {
  ordered_json j = ordered_json::object();
  j["premise_key"] = r.premise_key;
  j["prompt_id"] = r.prompt_id;
  j["sample_index"] = r.sample_index;
  j["dimension_id"] = r.dimension_id;
  j["polarity"] = to_string(r.polarity);
  j["label"] = to_int(r.label);
  j["backend"] = r.backend_name;
  return j;
}

ScoreRecord score_from_json(const json& j) {
  ScoreRecord r;
  r.premise_key = j.at("premise_key").get<std::string>();
  r.prompt_id = j.at("prompt_id").get<std::string>();
  r.sample_index = j.at("sample_index").get<int>();
  r.dimension_id = j.at("dimension_id").get<std::string>();
  r.polarity = parse_polarity(j.at("polarity").get<std::string>());
  const auto& label = j.at("label");
  if (!label.is_number_integer()) throw Error("score label is not an integer");
  r.label = label_from_int(label.get<long long>());
  r.backend_name = j.at("backend").get<std::string>();
  return r;
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
  std::vector<ScoreRecord> out;
  for (const auto& j : read_jsonl(path)) out.push_back(score_from_json(j));
  return out;
}

std::string premise_key(std::string_view text) { return short_hash(text); }

ResonanceLabel label_from_reply(const json& reply) {
  if (!reply.is_object()) throw MalformedReplyError("NLI reply is not a JSON object");
  if (reply.contains("scores")) {
    const auto& scores = reply["scores"];
    if (!scores.is_array() || scores.size() != 3) {
      throw MalformedReplyError("NLI reply 'scores' must be an array of 3 numbers");
    }
    std::array<double, 3> s{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!scores[i].is_number()) throw MalformedReplyError("NLI score is not a number");
      s[i] = scores[i].get<double>();
      if (!std::isfinite(s[i])) throw MalformedReplyError("NLI score is not finite");
    }
    const double best = std::max({s[0], s[1], s[2]});
    const int winners = (s[0] == best) + (s[1] == best) + (s[2] == best);
    if (winners > 1) return ResonanceLabel::neutral;
    if (s[0] == best) return ResonanceLabel::resonance;
    if (s[2] == best) return ResonanceLabel::conflict;
    return ResonanceLabel::neutral;
  }
  if (reply.contains("label") && reply["label"].is_string()) {
    const auto label = reply["label"].get<std::string>();
    if (label == "entailment") return ResonanceLabel::resonance;
    if (label == "contradiction") return ResonanceLabel::conflict;
    if (label == "neutral") return ResonanceLabel::neutral;
    throw MalformedReplyError("unknown NLI label '" + label + "'");
  }
  throw MalformedReplyError("NLI reply has neither 'scores' nor 'label'");
}

// ---------------------------------------------------------------------------

StubNliBackend::StubNliBackend(const ValueBank& bank) {
  for (const auto& d : bank.dimensions) {
    hypotheses_.emplace(d.traditional_hypothesis, std::make_pair(d.id, Polarity::traditional));
    hypotheses_.emplace(d.secular_hypothesis, std::make_pair(d.id, Polarity::secular));
  }
}

json StubNliBackend::reply(std::string_view premise, std::string_view hypothesis) const {
  auto make = [](const char* label, std::array<double, 3> scores) {
    return json{{"label", label}, {"scores", scores}};
  };
  const auto entail = [&] { return make("entailment", {0.9, 0.05, 0.05}); };
  const auto neutral = [&] { return make("neutral", {0.05, 0.9, 0.05}); };
  const auto contra = [&] { return make("contradiction", {0.05, 0.05, 0.9}); };

  if (trim(premise) == trim(hypothesis)) return entail();
  const auto it = hypotheses_.find(hypothesis);
  if (it == hypotheses_.end()) return neutral();
  const auto& [dim, polarity] = it->second;
  const bool res = premise.find(resonance_marker(dim, polarity)) != std::string_view::npos;
  const bool con = premise.find(conflict_marker(dim, polarity)) != std::string_view::npos;
  if (res && !con) return entail();
  if (con && !res) return contra();
  return neutral();
}

ResonanceLabel StubNliBackend::classify(std::string_view premise, std::string_view hypothesis) {
  return label_from_reply(reply(premise, hypothesis));
}

HttpNliBackend::HttpNliBackend(HttpNliOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) throw Error("NLI backend base_url is empty");
}

std::string HttpNliBackend::model_version() const {
  return options_.model_version.empty() ? "unversioned" : options_.model_version;
}

ResonanceLabel HttpNliBackend::classify(std::string_view premise, std::string_view hypothesis) {
  const json body = {{"premise", premise}, {"hypothesis", hypothesis}};
  const auto res = http_post_json(options_.base_url, options_.path, body.dump(), {}, options_.timeout);
  if (res.transport_failed()) throw BackendUnavailableError(res.transport_error);
  if (res.status >= 500 || res.status == 429) {
    throw BackendUnavailableError("HTTP " + std::to_string(res.status));
  }
  if (res.status != 200) {
    throw MalformedReplyError("HTTP " + std::to_string(res.status) + ": " + res.body);
  }
  json reply;
  try {
    reply = json::parse(res.body);
  } catch (const json::parse_error& e) {
    throw MalformedReplyError(std::string("NLI reply is not JSON: ") + e.what());
  }
  return label_from_reply(reply);
}

// ---------------------------------------------------------------------------

ScoreCache::ScoreCache(const std::filesystem::path& path) {
  for (const auto& j : read_jsonl(path)) {
    const auto& label = j.at("label");
    if (!label.is_number_integer()) throw Error("cache label is not an integer in " + path.string());
    labels_[j.at("key").get<std::string>()] = label_from_int(label.get<long long>());
  }
  writer_ = std::make_unique<JsonlWriter>(path, JsonlWriter::Mode::append);
}

std::string ScoreCache::key(std::string_view premise_key, std::string_view hypothesis,
                            std::string_view backend_name, std::string_view model_version) {
  std::string k(premise_key);
  k += '\x1f';
  k += hypothesis;
  k += '\x1f';
  k += backend_name;
  k += '\x1f';
  k += model_version;
  return short_hash(k);
}

std::optional<ResonanceLabel> ScoreCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  const auto it = labels_.find(key);
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::insert(const std::string& key, ResonanceLabel label) {
  std::unique_lock lock(mu_);
  if (!labels_.emplace(key, label).second) return;
  if (writer_) {
    ordered_json j = ordered_json::object();
    j["key"] = key;
    j["label"] = to_int(label);
    writer_->write(j);
  }
}

std::size_t ScoreCache::size() const {
  std::shared_lock lock(mu_);
  return labels_.size();
}

// ---------------------------------------------------------------------------

namespace {

struct PremiseCounters {
  std::size_t cache_hits = 0;
  std::size_t backend_calls = 0;
};

std::vector<ScoreRecord> score_one(const PremiseRecord& premise,
                                   std::span<const HypothesisEntry> hypotheses,
                                   NliBackend& backend, ScoreCache* cache,
                                   const ScoreOptions& options, PremiseCounters& counters) {
  if (trim(premise.text).empty()) throw Error("premise text is empty");
  if (hypotheses.empty()) throw Error("no hypotheses to score");
  const std::string pkey = premise_key(premise.text);
  const std::string backend_name = backend.name();
  const std::string version = backend.model_version();

  std::vector<ScoreRecord> out;
  out.reserve(hypotheses.size());
  for (const auto& h : hypotheses) {
    const std::string ckey = ScoreCache::key(pkey, h.text, backend_name, version);
    std::optional<ResonanceLabel> label = cache ? cache->lookup(ckey) : std::nullopt;
    if (label) {
      ++counters.cache_hits;
    } else {
      for (int attempt = 1;; ++attempt) {
        try {
          ++counters.backend_calls;
          label = backend.classify(premise.text, h.text);
          break;
        } catch (const BackendUnavailableError& e) {
          if (attempt >= options.retry.max_attempts) {
            throw PremiseScoringError(PremiseScoringError::Kind::unreachable, e.what());
          }
          options.sleep(options.retry.backoff_for(attempt));
        } catch (const MalformedReplyError& e) {
          throw PremiseScoringError(PremiseScoringError::Kind::malformed, e.what());
        }
      }
      if (cache) cache->insert(ckey, *label);
    }
    out.push_back({pkey, premise.prompt_id, premise.sample_index, h.dimension_id, h.polarity,
                   *label, backend_name});
  }
  return out;
}

}  // namespace

std::vector<ScoreRecord> score_premise(const PremiseRecord& premise,
                                       std::span<const HypothesisEntry> hypotheses,
                                       NliBackend& backend, ScoreCache* cache,
                                       const ScoreOptions& options) {
  PremiseCounters counters;
  return score_one(premise, hypotheses, backend, cache, options, counters);
}

ScoringReport score_dataset(std::span<const PremiseRecord> premises,
                            std::span<const HypothesisEntry> hypotheses, NliBackend& backend,
                            ScoreCache* cache, JsonlWriter* error_log,
                            const ScoreOptions& options) {
  std::vector<std::optional<std::vector<ScoreRecord>>> per_premise(premises.size());
  std::atomic<std::size_t> unreachable{0}, malformed{0}, hits{0}, calls{0};

  run_bounded(premises.size(), options.max_in_flight, [&](std::size_t i) {
    PremiseCounters counters;
    try {
      per_premise[i] = score_one(premises[i], hypotheses, backend, cache, options, counters);
    } catch (const PremiseScoringError& e) {
      (e.kind() == PremiseScoringError::Kind::unreachable ? unreachable : malformed)++;
      if (error_log) {
        ordered_json j = ordered_json::object();
        j["prompt_id"] = premises[i].prompt_id;
        j["sample_index"] = premises[i].sample_index;
        j["kind"] = e.kind() == PremiseScoringError::Kind::unreachable ? "unreachable" : "malformed";
        j["detail"] = e.what();
        error_log->write(j);
      }
    }
    hits += counters.cache_hits;
    calls += counters.backend_calls;
  });

  ScoringReport report;
  for (auto& recs : per_premise) {
    if (!recs) continue;
    ++report.premises_scored;
    for (auto& r : *recs) report.records.push_back(std::move(r));
  }
  report.failed_unreachable = unreachable;
  report.failed_malformed = malformed;
  report.cache_hits = hits;
  report.backend_calls = calls;
  return report;
}

// ---------------------------------------------------------------------------

double HypothesisTally::resonance_fraction() const {
  return total() == 0 ? 0.0 : static_cast<double>(resonance) / static_cast<double>(total());
}
double HypothesisTally::neutral_fraction() const {
  return total() == 0 ? 0.0 : static_cast<double>(neutral) / static_cast<double>(total());
}
double HypothesisTally::conflict_fraction() const {
  return total() == 0 ? 0.0 : static_cast<double>(conflict) / static_cast<double>(total());
}

std::vector<HypothesisTally> waterfall_stats(std::span<const ScoreRecord> scores,
                                             const ValueBank& bank, bool parallel) {
  const auto hyps = hypothesis_pairs(bank);
  std::vector<std::uint32_t> index(scores.size());
  std::vector<std::int8_t> labels(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const auto dim = bank.index_of(scores[k].dimension_id);
    if (!dim) throw Error("score for unknown dimension '" + scores[k].dimension_id + "'");
    index[k] = static_cast<std::uint32_t>(2 * *dim + (scores[k].polarity == Polarity::secular));
    labels[k] = static_cast<std::int8_t>(to_int(scores[k].label));
  }
  std::vector<kernels::LabelCounts> counts(hyps.size());
  if (parallel) {
    kernels::tally_parallel(index, labels, counts);
  } else {
    kernels::tally_serial(index, labels, counts);
  }
  std::vector<HypothesisTally> out;
  out.reserve(hyps.size());
  for (std::size_t h = 0; h < hyps.size(); ++h) {
    HypothesisTally t;
    t.dimension_id = hyps[h].dimension_id;
    t.polarity = hyps[h].polarity;
    t.hypothesis = hyps[h].text;
    t.conflict = counts[h][0];
    t.neutral = counts[h][1];
    t.resonance = counts[h][2];
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace valuelens
