#include <doctest.h>

#include <atomic>
#include <mutex>

#include "testing.hpp"
#include "valuelens/llm_client.hpp"

using namespace valuelens;

namespace {

std::vector<PromptRecord> some_prompts(std::size_t n) {
  const auto profiles = enumerate_profiles(LevelSets::defaults());
  const auto all = render_prompts(profiles, default_bank());
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<std::string> dims() {
  std::vector<std::string> out;
  for (const auto& d : default_bank().dimensions) out.push_back(d.id);
  return out;
}

CollectOptions quiet() {
  CollectOptions o;
  o.sleep = [](std::chrono::milliseconds) {};
  o.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  return o;
}

// Scripted backend: returns queued results, then a fixed text.
class Scripted : public CompletionBackend {
 public:
  std::vector<CompletionResult> script;
  std::atomic<int> calls{0};
  CompletionResult complete(const PromptRecord&, int, const SamplingConfig&) override {
    std::lock_guard lock(mu_);
    ++calls;
    if (!script.empty()) {
      auto r = script.front();
      script.erase(script.begin());
      return r;
    }
    return {CompletionStatus::ok, "  fine text  ", "", std::nullopt};
  }
  std::string name() const override { return "scripted"; }

 private:
  std::mutex mu_;
};

}  // namespace

TEST_SUITE("llm_client") {

TEST_CASE("sampling defaults and bounds") {
  SamplingConfig cfg;
  CHECK(cfg.max_tokens == 200);
  CHECK(cfg.temperature == 1.0);
  CHECK(cfg.top_p == 0.5);
  CHECK(cfg.samples_per_prompt == 50);
  CHECK_NOTHROW(cfg.validate());
  cfg.top_p = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.temperature = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.samples_per_prompt = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("one prompt, one sample, deterministic stub text") {
  testing::TempDir dir;
  const auto prompts = some_prompts(1);
  SamplingConfig cfg;
  cfg.samples_per_prompt = 1;
  StubCompletionBackend stub(dims(), 42);
  PremiseStore store(dir / "p.jsonl");
  const auto rep = collect(prompts, cfg, stub, store, nullptr, quiet());
  CHECK(rep.collected == 1);
  const auto recs = read_premises(dir / "p.jsonl");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].text == stub.complete(prompts[0], 0, cfg).text);
  CHECK_FALSE(recs[0].text.empty());
  CHECK(recs[0].prompt_id == prompts[0].prompt_id);
  CHECK(recs[0].profile == prompts[0].profile);
  CHECK(recs[0].model_name == cfg.model_name);
  StubCompletionBackend other(dims(), 43);
  bool any_diff = false;
  for (int i = 0; i < 20; ++i) any_diff |= other.complete(prompts[0], i, cfg).text != stub.complete(prompts[0], i, cfg).text;
  CHECK(any_diff);
}

TEST_CASE("stub text carries markers for the asked dimension") {
  const auto prompts = some_prompts(6);
  StubCompletionBackend stub(dims(), 0);
  SamplingConfig cfg;
  int marked = 0;
  for (int i = 0; i < 50; ++i) {
    const auto t = stub.complete(prompts[0], i, cfg).text;  // first dimension: god
    if (t.find("[RES:god_") != std::string::npos || t.find("[CON:god_") != std::string::npos) ++marked;
    CHECK(t.find("abortion_") == std::string::npos);
  }
  CHECK(marked > 25);
  CHECK(resonance_marker("god", Polarity::traditional) == "[RES:god_t]");
  CHECK(conflict_marker("pride", Polarity::secular) == "[CON:pride_s]");
}

TEST_CASE("stub lean stays in range and depends on persona") {
  for (const auto& p : enumerate_profiles(LevelSets::defaults())) {
    const double l = StubCompletionBackend::traditional_lean(p);
    CHECK(l >= 0.05);
    CHECK(l <= 0.95);
  }
  CHECK(StubCompletionBackend::traditional_lean({20, "German", "man"}) <
        StubCompletionBackend::traditional_lean({75, "German", "man"}));
}

TEST_CASE("resume after 10 of 20 records adds exactly 10") {
  testing::TempDir dir;
  const auto prompts = some_prompts(2);
  SamplingConfig cfg;
  cfg.samples_per_prompt = 10;
  StubCompletionBackend stub(dims(), 1);
  {
    PremiseStore store(dir / "p.jsonl");
    collect(std::span(prompts).first(1), cfg, stub, store, nullptr, quiet());
    CHECK(store.size() == 10);
  }
  PremiseStore store(dir / "p.jsonl");
  const auto rep = collect(prompts, cfg, stub, store, nullptr, quiet());
  CHECK(rep.already_present == 10);
  CHECK(rep.collected == 10);
  const auto recs = read_premises(dir / "p.jsonl");
  CHECK(recs.size() == 20);
  std::set<std::pair<std::string, int>> keys;
  for (const auto& r : recs) keys.insert({r.prompt_id, r.sample_index});
  CHECK(keys.size() == 20);

  // Idempotent: a third pass changes nothing.
  const auto again = collect(prompts, cfg, stub, store, nullptr, quiet());
  CHECK(again.collected == 0);
  CHECK(read_premises(dir / "p.jsonl").size() == 20);
}

TEST_CASE("store refuses duplicates") {
  testing::TempDir dir;
  PremiseStore store(dir / "p.jsonl");
  PremiseRecord r{"abc", 0, "text", "m", "t", {}, "god"};
  CHECK(store.append(r));
  CHECK_FALSE(store.append(r));
  CHECK(store.size() == 1);
  CHECK(store.contains("abc", 0));
}

TEST_CASE("empty completions retry then land in the failure log") {
  testing::TempDir dir;
  const auto prompts = some_prompts(1);
  SamplingConfig cfg;
  cfg.samples_per_prompt = 1;
  Scripted backend;
  for (int i = 0; i < 5; ++i) backend.script.push_back({CompletionStatus::ok, "   ", "", std::nullopt});
  PremiseStore store(dir / "p.jsonl");
  JsonlWriter failures(dir / "f.jsonl");
  const auto rep = collect(prompts, cfg, backend, store, &failures, quiet());
  CHECK(rep.failed == 1);
  CHECK(store.size() == 0);
  CHECK(backend.calls == 5);
  const auto f = read_jsonl(dir / "f.jsonl");
  REQUIRE(f.size() == 1);
  CHECK(f[0]["attempts"] == 5);
}

TEST_CASE("transient errors recover within the budget, text is trimmed") {
  testing::TempDir dir;
  const auto prompts = some_prompts(1);
  SamplingConfig cfg;
  cfg.samples_per_prompt = 1;
  Scripted backend;
  backend.script.push_back({CompletionStatus::transport_error, "", "reset", std::nullopt});
  backend.script.push_back({CompletionStatus::ok, "", "", std::nullopt});
  std::vector<std::chrono::milliseconds> slept;
  auto opt = quiet();
  opt.sleep = [&](std::chrono::milliseconds d) { slept.push_back(d); };
  PremiseStore store(dir / "p.jsonl");
  collect(prompts, cfg, backend, store, nullptr, opt);
  CHECK(store.size() == 1);
  CHECK(read_premises(dir / "p.jsonl")[0].text == "fine text");
  REQUIRE(slept.size() == 2);
  CHECK(slept[1] == 2 * slept[0]);  // exponential backoff
}

TEST_CASE("quota pauses do not spend attempts") {
  testing::TempDir dir;
  const auto prompts = some_prompts(1);
  SamplingConfig cfg;
  cfg.samples_per_prompt = 1;
  Scripted backend;
  for (int i = 0; i < 7; ++i) {
    backend.script.push_back({CompletionStatus::quota_exhausted, "", "429", std::chrono::milliseconds(1500)});
  }
  std::vector<std::chrono::milliseconds> slept;
  auto opt = quiet();
  opt.sleep = [&](std::chrono::milliseconds d) { slept.push_back(d); };
  PremiseStore store(dir / "p.jsonl");
  const auto rep = collect(prompts, cfg, backend, store, nullptr, opt);
  CHECK(rep.collected == 1);
  CHECK(slept.size() == 7);
  CHECK(slept[0] == std::chrono::milliseconds(1500));
}

TEST_CASE("authentication failure is fatal and keeps earlier records") {
  testing::TempDir dir;
  const auto prompts = some_prompts(1);
  SamplingConfig cfg;
  cfg.samples_per_prompt = 3;
  Scripted backend;
  backend.script.push_back({CompletionStatus::ok, "first", "", std::nullopt});
  for (int i = 0; i < 10; ++i) backend.script.push_back({CompletionStatus::auth_error, "", "401", std::nullopt});
  PremiseStore store(dir / "p.jsonl");
  auto opt = quiet();
  opt.max_in_flight = 1;
  CHECK_THROWS_AS(collect(prompts, cfg, backend, store, nullptr, opt), AuthenticationError);
  CHECK(read_premises(dir / "p.jsonl").size() == 1);
}

TEST_CASE("http completion adapter against a fake server") {
  std::atomic<int> hits{0};
  testing::FakeServer server([&](httplib::Server& s) {
    s.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      const auto body = json::parse(req.body);
      if (req.get_header_value("Authorization") != "Bearer k") {
        res.status = 401;
        return;
      }
      if (hits == 1) {
        res.status = 429;
        res.set_header("Retry-After", "2");
        return;
      }
      CHECK(body["max_tokens"] == 200);
      CHECK(body["top_p"] == 0.5);
      res.set_content(json{{"choices", {{{"text", " ok " + body["prompt"].get<std::string>().substr(0, 7)}}}}}.dump(),
                      "application/json");
    });
    s.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", "chat " + body["messages"][0]["content"].get<std::string>().substr(0, 7)}}}}}}}.dump(),
                      "application/json");
    });
  });
  const auto prompts = some_prompts(1);
  SamplingConfig cfg;
  HttpCompletionBackend completion({server.base_url() + "/v1", ApiStyle::completion, "k", std::chrono::seconds(5)});
  const auto quota = completion.complete(prompts[0], 0, cfg);
  CHECK(quota.status == CompletionStatus::quota_exhausted);
  REQUIRE(quota.retry_after.has_value());
  CHECK(*quota.retry_after == std::chrono::milliseconds(2000));
  const auto ok = completion.complete(prompts[0], 0, cfg);
  CHECK(ok.status == CompletionStatus::ok);
  CHECK(ok.text == " ok You are");

  HttpCompletionBackend wrong_key({server.base_url() + "/v1", ApiStyle::completion, "x", std::chrono::seconds(5)});
  CHECK(wrong_key.complete(prompts[0], 0, cfg).status == CompletionStatus::auth_error);

  HttpCompletionBackend chat({server.base_url() + "/v1", ApiStyle::chat, "k", std::chrono::seconds(5)});
  CHECK(chat.complete(prompts[0], 0, cfg).text == "chat You are");

  HttpCompletionBackend dead({"http://127.0.0.1:1", ApiStyle::completion, "k", std::chrono::seconds(1)});
  CHECK(dead.complete(prompts[0], 0, cfg).status == CompletionStatus::transport_error);
}

}
