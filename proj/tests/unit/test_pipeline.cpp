#include <doctest.h>

#include "testing.hpp"
#include "valuelens/pipeline.hpp"
#include "valuelens/projection.hpp"

using namespace valuelens;

namespace {

RunConfig small_config(const testing::TempDir& dir, const std::string& extra = "") {
  write_text_file(dir / "run.yaml",
                  "output_dir: out\n"
                  "levels:\n  ages: [20, 40, 75]\n  nations: [German, Nigerian, Japanese]\n  sexes: [man, woman]\n"
                  "llm:\n  samples_per_prompt: 3\n  max_in_flight: 2\n"
                  "wvs:\n  csv: " + (testing::data_dir() / "wvs_synthetic.csv").string() + "\n" + extra);
  return load_config(dir / "run.yaml", kAllStages);
}

PipelineHooks fixed_clock() {
  PipelineHooks h;
  h.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  h.sleep = [](std::chrono::milliseconds) {};
  return h;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("stages in order produce every artifact") {
  testing::TempDir dir;
  Pipeline p(small_config(dir), fixed_clock());
  const auto g = p.gen_prompts();
  CHECK(g["profiles"] == expected_profile_count(3, 3, 2));
  CHECK(g["prompts"] == 6 * expected_profile_count(3, 3, 2));
  const auto c = p.collect();
  CHECK(c["collected"] == 3 * 6 * expected_profile_count(3, 3, 2));
  const auto s = p.score();
  CHECK(s["premises_scored"] == c["collected"]);
  CHECK(s["records"] == 10 * c["collected"].get<std::size_t>());
  const auto pr = p.project();
  CHECK(pr["incomplete_premises"] == 0);
  const auto w = p.ingest_wvs();
  CHECK(w["retained"] == 108);  // 3 nations x 6 brackets x 2 sexes x 3
  const auto cmp = p.compare();
  CHECK(cmp["groups_paired"] == 3 * 3 * 2);
  const auto ab = p.ablate();
  CHECK(ab["premises"] == 3 * 18);
  const auto rep = p.report();
  CHECK(rep["figures"].get<int>() >= 1);
  for (const char* a : {artifacts::kPrompts, artifacts::kPremises, artifacts::kScores, artifacts::kProjections,
                        artifacts::kRespondents, artifacts::kDropReport, artifacts::kSummaries,
                        artifacts::kGroupMeans, artifacts::kRegressionNation, artifacts::kRegressionPooled,
                        artifacts::kFitTable, artifacts::kCompareDiagnostics, artifacts::kAblationSummaries,
                        artifacts::kAblationVariance}) {
    CHECK_MESSAGE(std::filesystem::exists(p.path(a)), a);
  }
  CHECK(std::filesystem::exists(p.run_dir() / "config.frozen.yaml"));
  CHECK(std::filesystem::exists(p.run_dir() / "figures" / "index.json"));
  // Groups present only in WVS are counted, not paired.
  const auto diag = json::parse(read_text_file(p.path(artifacts::kCompareDiagnostics)));
  CHECK(diag["groups_missing_llm"].size() == 3 * 3 * 2);
}

TEST_CASE("collect resumes and score is stable across reruns") {
  testing::TempDir dir;
  Pipeline p(small_config(dir), fixed_clock());
  p.gen_prompts();
  p.collect();
  const auto again = p.collect();
  CHECK(again["collected"] == 0);
  CHECK(again["already_present"] == again["requested"]);
  p.score();
  const auto first = read_text_file(p.path(artifacts::kScores));
  const auto warm = p.score();
  CHECK(warm["backend_calls"] == 0);
  CHECK(read_text_file(p.path(artifacts::kScores)) == first);
}

TEST_CASE("stages report missing inputs by producer") {
  testing::TempDir dir;
  Pipeline p(small_config(dir), fixed_clock());
  try {
    p.score();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("collect") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS(p.collect(), doctest::Contains("gen-prompts"), Error);
}

TEST_CASE("injected backends are used") {
  class Fixed : public NliBackend {
   public:
    ResonanceLabel classify(std::string_view, std::string_view) override { return ResonanceLabel::conflict; }
    std::string name() const override { return "fixed"; }
    std::string model_version() const override { return "0"; }
  };
  testing::TempDir dir;
  auto hooks = fixed_clock();
  hooks.nli = std::make_shared<Fixed>();
  Pipeline p(small_config(dir), hooks);
  p.gen_prompts();
  p.collect();
  CHECK(p.score()["backend"] == "fixed");
  p.project();
  for (const auto& row : read_projections(p.path(artifacts::kProjections))) {
    // Conflict everywhere: the polar modes sit at opposite extremes and cancel.
    if (row.mode == ProjectionMode::combined) CHECK(row.value == 0.0);
    if (row.mode == ProjectionMode::traditional_only) CHECK(row.value == doctest::Approx(3.03));
    if (row.mode == ProjectionMode::secular_only) CHECK(row.value == doctest::Approx(-3.03));
  }
}

}
