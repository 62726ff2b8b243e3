#include <doctest.h>

#include <algorithm>

#include "testing.hpp"
#include "valuelens/pipeline_config.hpp"

using namespace valuelens;

namespace {

ValidationResult check(const std::string& yaml, std::vector<Stage> stages = {}) {
  return validate_config_text(yaml, testing::data_dir() / "inline.yaml", stages);
}

bool has_issue(const ValidationResult& r, const std::string& path) {
  return std::any_of(r.issues.begin(), r.issues.end(), [&](const ConfigIssue& i) { return i.path == path; });
}

}  // namespace

TEST_SUITE("pipeline_config") {

TEST_CASE("shipped config is valid and reproduces the grid") {
  const auto r = validate_config(testing::source_dir() / "config" / "run.yaml", kAllStages);
  for (const auto& i : r.issues) MESSAGE(i.to_string("run.yaml"));
  REQUIRE(r.ok());
  const auto& c = *r.config;
  const auto profiles = enumerate_profiles(c.levels);
  CHECK(profiles.size() == 188);
  CHECK(render_prompts(profiles, c.bank).size() == 1128);
  CHECK(c.llm.sampling.samples_per_prompt == 50);
  CHECK(c.bank == default_bank());
  CHECK(c.analysis.general_prompt_only);
  CHECK(c.analysis.full_triple_only);
  CHECK(c.analysis.mode == ProjectionMode::combined);
  CHECK(c.wvs_schema.variables.size() == 5);
  CHECK(c.wvs_schema.variables[0].invert);
  CHECK(c.figure_manifest.has_value());
}

TEST_CASE("an empty document means defaults") {
  const auto r = check("");
  REQUIRE(r.ok());
  CHECK(r.config->levels.ages.size() == 6);
  CHECK(r.config->llm.backend == "stub");
}

TEST_CASE("unknown nation in the analysis filter is a single targeted error") {
  const auto r = check("analysis:\n  nations: [German, Martian]\n");
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].path == "analysis.nations[1]");
  CHECK(r.issues[0].reason.find("Martian") != std::string::npos);
  CHECK(r.issues[0].line == 2);
}

TEST_CASE("missing WVS path names the stage that needs it") {
  const auto r = check("seed: 1\n", {Stage::compare});
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].path == "wvs.csv");
  CHECK(r.issues[0].reason.find("compare") != std::string::npos);
  CHECK(check("seed: 1\n", {Stage::score}).ok());
}

TEST_CASE("validation is total") {
  const auto r = check(
      "seed: 1\n"
      "colour: blue\n"
      "llm:\n"
      "  temperature: hot\n"
      "  top_p: 1.5\n"
      "  backend: local\n"
      "nli:\n"
      "  max_in_flight: 0\n"
      "analysis:\n"
      "  mode: sideways\n"
      "bank: no_such_bank.yaml\n");
  CHECK(r.issues.size() == 7);
  for (const char* p : {"colour", "llm.temperature", "llm.top_p", "llm.backend", "nli.max_in_flight",
                        "analysis.mode", "bank"}) {
    CHECK_MESSAGE(has_issue(r, p), p);
  }
  CHECK_FALSE(r.config.has_value());
  // Issues come back in file order.
  CHECK(std::is_sorted(r.issues.begin(), r.issues.end(),
                       [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; }));
}

TEST_CASE("wvs variables are checked against the bank") {
  const auto r = check(
      "wvs:\n"
      "  csv: wvs_synthetic.csv\n"
      "  variables:\n"
      "    - {column: Q164, dimension: god, options: 10, invert: true}\n"
      "    - {column: Q1, dimension: nothing, options: 1}\n");
  CHECK(has_issue(r, "wvs.variables[1].options"));
  CHECK(has_issue(r, "wvs.variables"));
}

TEST_CASE("http backends need endpoints and keys") {
  const auto r = check("llm:\n  backend: http\n  base_url: \"\"\n  api_key_env: VALUELENS_TEST_UNSET_KEY\n"
                       "nli:\n  backend: http\n",
                       {Stage::collect, Stage::score});
  CHECK(has_issue(r, "llm.base_url"));
  CHECK(has_issue(r, "llm.api_key_env"));
  CHECK(has_issue(r, "nli.url"));
}

TEST_CASE("syntax errors are reported, not thrown") {
  const auto r = check("levels: [unclosed\n");
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].path == "(document)");
}

TEST_CASE("run id ignores locations and tracks content") {
  const auto a = check("output_dir: /tmp/a\n");
  const auto b = check("output_dir: /tmp/b\n");
  const auto c = check("output_dir: /tmp/a\nseed: 9\n");
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  REQUIRE(c.ok());
  CHECK(a.config->run_id() == b.config->run_id());
  CHECK(a.config->run_id() != c.config->run_id());
  CHECK(a.config->run_dir() == std::filesystem::path("/tmp/a") / ("run-" + a.config->run_id()));
  const auto throughput = check("output_dir: /tmp/a\nllm:\n  max_in_flight: 2\n");
  CHECK(throughput.config->run_id() == a.config->run_id());
}

TEST_CASE("frozen config reloads to the same run") {
  testing::TempDir dir;
  const auto src = dir / "run.yaml";
  write_text_file(src, "output_dir: out\nseed: 4\nwvs:\n  csv: " + (testing::data_dir() / "wvs_synthetic.csv").string() +
                           "\nlevels:\n  ages: [30, 60]\n");
  const auto cfg = load_config(src);
  freeze(cfg);
  const auto frozen = cfg.run_dir() / "config.frozen.yaml";
  REQUIRE(std::filesystem::exists(frozen));
  CHECK(std::filesystem::exists(cfg.run_dir() / "bank.frozen.yaml"));
  const auto again = load_config(frozen, kAllStages);
  CHECK(again.run_id() == cfg.run_id());
  CHECK(again.run_dir() == cfg.run_dir());
  CHECK(again.frozen_yaml() == cfg.frozen_yaml());
  CHECK(again.levels.ages == std::vector<int>{30, 60});
  CHECK(cfg.frozen_yaml().find("api_key_env") != std::string::npos);
}

TEST_CASE("load_config throws every issue at once") {
  testing::TempDir dir;
  write_text_file(dir / "bad.yaml", "seed: abc\nllm:\n  top_p: 0\n  max_tokens: 0\n");
  try {
    load_config(dir / "bad.yaml");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.issues().size() == 3);
  }
  CHECK_THROWS_AS(load_config(dir / "absent.yaml"), ConfigError);
}

TEST_CASE("stage names") {
  for (auto s : kAllStages) CHECK(parse_stage(to_string(s)) == s);
  CHECK(to_string(Stage::ingest_wvs) == "ingest-wvs");
  CHECK_THROWS(parse_stage("nope"));
}

}
