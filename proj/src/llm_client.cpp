#include "valuelens/llm_client.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "valuelens/http_transport.hpp"

namespace valuelens {

void SamplingConfig::validate() const {
  if (max_tokens < 1) throw Error("max_tokens must be >= 1");
  if (!(temperature >= 0.0)) throw Error("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error("top_p must be in (0, 1]");
  if (samples_per_prompt < 1) throw Error("samples_per_prompt must be >= 1");
  if (model_name.empty()) throw Error("model_name is empty");
}

ordered_json to_json(const PremiseRecord& r) {
  ordered_json j = ordered_json::object();
  j["prompt_id"] = r.prompt_id;
  j["sample_index"] = r.sample_index;
  j["text"] = r.text;
  j["model_name"] = r.model_name;
  j["collected_at"] = r.collected_at;
  j["profile"] = to_json(r.profile);
  j["dimension_id"] = r.dimension_id;
  return j;
}

PremiseRecord premise_from_json(const json& j) {
  PremiseRecord r;
  r.prompt_id = j.at("prompt_id").get<std::string>();
  r.sample_index = j.at("sample_index").get<int>();
  r.text = j.at("text").get<std::string>();
  r.model_name = j.value("model_name", "");
  r.collected_at = j.value("collected_at", "");
  r.profile = profile_from_json(j.at("profile"));
  r.dimension_id = j.at("dimension_id").get<std::string>();
  return r;
}

std::vector<PremiseRecord> read_premises(const std::filesystem::path& path) {
  std::vector<PremiseRecord> out;
  for (const auto& j : read_jsonl(path)) out.push_back(premise_from_json(j));
  return out;
}

std::string resonance_marker(std::string_view dimension_id, Polarity p) {
  return "[RES:" + std::string(dimension_id) + (p == Polarity::traditional ? "_t]" : "_s]");
}

std::string conflict_marker(std::string_view dimension_id, Polarity p) {
  return "[CON:" + std::string(dimension_id) + (p == Polarity::traditional ? "_t]" : "_s]");
}

// ---------------------------------------------------------------------------
// Stub backend

namespace {

std::uint64_t hash_u64(std::string_view s) {
  return std::stoull(sha256_hex(s).substr(0, 16), nullptr, 16);
}

// Portable uniform draw in [0, 1): the engine's output sequence is fixed by
// the standard, the distribution classes are not.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string persona_phrase(const DemographicProfile& p) {
  std::string out;
  if (p.age) out += std::to_string(*p.age) + " year old ";
  if (p.nationality) out += *p.nationality + " ";
  out += p.sex.value_or("person");
  return out;
}

}  // namespace

StubCompletionBackend::StubCompletionBackend(std::vector<std::string> dimension_ids,
                                             std::uint64_t seed)
    : dimension_ids_(std::move(dimension_ids)), seed_(seed) {}

double StubCompletionBackend::traditional_lean(const DemographicProfile& profile) {
  double lean = 0.5;
  if (profile.nationality) {
    const double u = static_cast<double>(hash_u64("nation:" + *profile.nationality) >> 11) *
                     0x1.0p-53;
    lean += 0.5 * (u - 0.5);
  }
  if (profile.age) lean += 0.004 * (*profile.age - 45);
  if (profile.sex && *profile.sex == "woman") lean += 0.03;
  return std::clamp(lean, 0.05, 0.95);
}

CompletionResult StubCompletionBackend::complete(const PromptRecord& prompt, int sample_index,
                                                 const SamplingConfig&) {
  std::mt19937_64 rng(hash_u64(std::to_string(seed_) + '\x1f' + prompt.prompt_id + '\x1f' +
                               std::to_string(sample_index)));
  const double lean = traditional_lean(prompt.profile);

  std::vector<std::string> dims;
  if (prompt.dimension_id == kGeneralDimension) {
    dims = dimension_ids_;
  } else {
    dims.push_back(prompt.dimension_id);
  }

  std::string text = "Speaking as a " + persona_phrase(prompt.profile) + ", response " +
                     std::to_string(sample_index) + ".";
  for (const auto& dim : dims) {
    const double u = uniform01(rng);
    const double v = uniform01(rng);
    const double w = uniform01(rng);
    if (u < 0.15) {
      text += " On " + dim + " I have little to add.";
    } else if (u < 0.27) {
      text += " On " + dim + " I hold a moderate view. " + conflict_marker(dim, Polarity::traditional) +
              " " + conflict_marker(dim, Polarity::secular);
    } else {
      const Polarity lean_to = v < lean ? Polarity::traditional : Polarity::secular;
      const Polarity other =
          lean_to == Polarity::traditional ? Polarity::secular : Polarity::traditional;
      text += " On " + dim + " my view is " + std::string(to_string(lean_to)) + ". " +
              resonance_marker(dim, lean_to);
      if (w < 0.6) text += " " + conflict_marker(dim, other);
    }
  }
  return CompletionResult{CompletionStatus::ok, std::move(text), {}, std::nullopt};
}

// ---------------------------------------------------------------------------
// HTTP backend

HttpCompletionBackend::HttpCompletionBackend(HttpCompletionOptions options)
    : options_(std::move(options)) {
  if (options_.base_url.empty()) throw Error("completion backend base_url is empty");
}

std::string HttpCompletionBackend::name() const {
  return options_.style == ApiStyle::chat ? "http-chat" : "http-completion";
}

CompletionResult HttpCompletionBackend::complete(const PromptRecord& prompt, int,
                                                 const SamplingConfig& cfg) {
  json body = {{"model", cfg.model_name},
               {"max_tokens", cfg.max_tokens},
               {"temperature", cfg.temperature},
               {"top_p", cfg.top_p}};
  std::string path;
  if (options_.style == ApiStyle::chat) {
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt.rendered_prompt}}});
    path = "/chat/completions";
  } else {
    body["prompt"] = prompt.rendered_prompt;
    path = "/completions";
  }
  HttpHeaders headers;
  if (!options_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + options_.api_key);

  const auto res = http_post_json(options_.base_url, path, body.dump(), headers, options_.timeout);
  CompletionResult out;
  if (res.transport_failed()) {
    out.status = CompletionStatus::transport_error;
    out.detail = res.transport_error;
    return out;
  }
  if (res.status == 401 || res.status == 403) {
    out.status = CompletionStatus::auth_error;
    out.detail = "HTTP " + std::to_string(res.status);
    return out;
  }
  if (res.status == 429) {
    out.status = CompletionStatus::quota_exhausted;
    out.detail = "HTTP 429";
    if (auto it = res.headers.find("Retry-After"); it != res.headers.end()) {
      try {
        out.retry_after = std::chrono::milliseconds(
            static_cast<long long>(std::ceil(std::stod(it->second) * 1000.0)));
      } catch (const std::exception&) {
      }
    }
    return out;
  }
  if (res.status != 200) {
    out.status = CompletionStatus::transport_error;
    out.detail = "HTTP " + std::to_string(res.status);
    return out;
  }
  try {
    const auto reply = json::parse(res.body);
    const auto& choice = reply.at("choices").at(0);
    out.text = options_.style == ApiStyle::chat
                   ? choice.at("message").at("content").get<std::string>()
                   : choice.at("text").get<std::string>();
  } catch (const json::exception& e) {
    out.status = CompletionStatus::transport_error;
    out.detail = std::string("malformed completion reply: ") + e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Store and collector

PremiseStore::PremiseStore(const std::filesystem::path& path) : path_(path) {
  for (const auto& j : read_jsonl(path_)) {
    keys_.emplace(j.at("prompt_id").get<std::string>(), j.at("sample_index").get<int>());
  }
  writer_ = std::make_unique<JsonlWriter>(path_, JsonlWriter::Mode::append);
}

bool PremiseStore::contains(const std::string& prompt_id, int sample_index) const {
  std::lock_guard lock(mu_);
  return keys_.contains({prompt_id, sample_index});
}

bool PremiseStore::append(const PremiseRecord& record) {
  std::lock_guard lock(mu_);
  if (!keys_.emplace(record.prompt_id, record.sample_index).second) return false;
  writer_->write(to_json(record));
  return true;
}

std::size_t PremiseStore::size() const {
  std::lock_guard lock(mu_);
  return keys_.size();
}

CollectReport collect(std::span<const PromptRecord> prompts, const SamplingConfig& cfg,
                      CompletionBackend& backend, PremiseStore& store, JsonlWriter* failure_log,
                      const CollectOptions& options) {
  cfg.validate();
  CollectReport report;
  std::vector<std::pair<const PromptRecord*, int>> jobs;
  for (const auto& p : prompts) {
    for (int s = 0; s < cfg.samples_per_prompt; ++s) {
      ++report.requested;
      if (store.contains(p.prompt_id, s)) {
        ++report.already_present;
      } else {
        jobs.emplace_back(&p, s);
      }
    }
  }

  RateLimiter limiter(options.requests_per_second, options.sleep);
  std::mutex report_mu;

  auto record_failure = [&](const PromptRecord& p, int sample, const std::string& reason,
                            int attempts) {
    if (failure_log) {
      ordered_json j = ordered_json::object();
      j["prompt_id"] = p.prompt_id;
      j["sample_index"] = sample;
      j["reason"] = reason;
      j["attempts"] = attempts;
      failure_log->write(j);
    }
    std::lock_guard lock(report_mu);
    ++report.failed;
  };

  run_bounded(jobs.size(), options.max_in_flight, [&](std::size_t i) {
    const auto& [prompt, sample] = jobs[i];
    int attempts = 0;
    int quota_pauses = 0;
    std::string last_reason;
    while (true) {
      limiter.acquire();
      auto res = backend.complete(*prompt, sample, cfg);
      switch (res.status) {
        case CompletionStatus::auth_error:
          throw AuthenticationError("completion backend rejected credentials: " + res.detail);
        case CompletionStatus::quota_exhausted:
          if (++quota_pauses > options.retry.max_quota_pauses) {
            record_failure(*prompt, sample, "quota exhausted: " + res.detail, attempts);
            return;
          }
          options.sleep(res.retry_after.value_or(options.retry.quota_pause));
          continue;
        case CompletionStatus::transport_error:
          last_reason = "transport: " + res.detail;
          break;
        case CompletionStatus::ok: {
          std::string text = trim(res.text);
          if (!text.empty()) {
            PremiseRecord rec{prompt->prompt_id, sample,           std::move(text),
                              cfg.model_name,    options.clock(),  prompt->profile,
                              prompt->dimension_id};
            if (store.append(rec)) {
              std::lock_guard lock(report_mu);
              ++report.collected;
            }
            return;
          }
          last_reason = "empty response";
          break;
        }
      }
      ++attempts;
      if (attempts >= options.retry.max_attempts) {
        record_failure(*prompt, sample, last_reason, attempts);
        return;
      }
      options.sleep(options.retry.backoff_for(attempts));
    }
  });
  return report;
}

}  // namespace valuelens
