#include <doctest.h>

#include "testing.hpp"
#include "valuelens/pipeline.hpp"
#include "valuelens/projection.hpp"
#include "valuelens/report.hpp"
#include "valuelens/rvr_client.hpp"

using namespace valuelens;

namespace {

void write_projections(const std::filesystem::path& path, const std::vector<double>& values) {
  std::vector<ordered_json> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    PremiseProjection p{"k" + std::to_string(i), "pid", static_cast<int>(i), "general",
                        {30, "German", "man"}, ProjectionMode::combined, values[i]};
    rows.push_back(to_json(p));
  }
  write_jsonl(path, rows);
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("waterfall sidecar counts every hypothesis and sorts by non-neutral share") {
  testing::TempDir dir;
  std::vector<ordered_json> rows;
  const auto hyps = hypothesis_pairs(default_bank());
  // Premise i resonates with the first i hypotheses and is neutral elsewhere.
  for (int i = 0; i < 10; ++i) {
    for (std::size_t h = 0; h < hyps.size(); ++h) {
      const auto label = static_cast<int>(h) < i ? ResonanceLabel::resonance : ResonanceLabel::neutral;
      rows.push_back(to_json(ScoreRecord{"k" + std::to_string(i), "p", i, hyps[h].dimension_id,
                                         hyps[h].polarity, label, "stub"}));
    }
  }
  write_jsonl(dir / "s.jsonl", rows);
  FigureSpec spec{"w", FigureKind::waterfall, {{"scores", dir / "s.jsonl"}}, dir / "w.svg",
                  "", "", "", Slice::nation, "source"};
  const auto side = build_sidecar(spec, default_bank(), AnalysisFilter{});
  const auto& hs = side["hypotheses"];
  REQUIRE(hs.size() == 10);
  for (std::size_t k = 0; k < hs.size(); ++k) {
    // Hypothesis h is resonated with by premises h+1..9.
    const auto h = hs[k]["index"].get<std::size_t>() - 1;  // 1-based in the sidecar
    CHECK(hs[k]["resonance"] == 9 - h);
    CHECK(hs[k]["neutral"] == h + 1);
    CHECK(hs[k]["conflict"] == 0);
    CHECK(hs[k]["hypothesis"] == hyps[h].text);
    if (k > 0) CHECK(hs[k - 1]["resonance"].get<int>() >= hs[k]["resonance"].get<int>());
  }
}

TEST_CASE("boxpanel over one constant group has a flat box") {
  testing::TempDir dir;
  write_projections(dir / "p.jsonl", {-1.0, -1.0, -1.0});
  FigureSpec spec{"one", FigureKind::boxpanel, {{"projections", dir / "p.jsonl"}}, dir / "one.svg",
                  "One", "", "", Slice::nation, "source"};
  const auto r = render(spec, default_bank(), AnalysisFilter{});
  CHECK(r.image_written);
  const auto side = json::parse(read_text_file(r.sidecar));
  REQUIRE(side["boxes"].size() == 1);
  const auto& st = side["boxes"][0]["stats"];
  CHECK(st["q1"] == -1.0);
  CHECK(st["q3"] == -1.0);
  CHECK(st["median"] == -1.0);
  CHECK(side["boxes"][0]["group"] == "German");
}

TEST_CASE("the image is a pure function of the sidecar") {
  testing::TempDir dir;
  write_projections(dir / "p.jsonl", {-1.0, 0.5, 0.25, 2.0});
  FigureSpec spec{"f", FigureKind::boxpanel, {{"projections", dir / "p.jsonl"}}, dir / "f.svg",
                  "F <&>", "", "", Slice::nation, "source"};
  const auto r = render(spec, default_bank(), AnalysisFilter{});
  const auto svg = read_text_file(r.svg);
  CHECK(render_svg(json::parse(read_text_file(r.sidecar))) == svg);
  CHECK(svg.find("F &lt;&amp;&gt;") != std::string::npos);
  // Re-rendering gives identical bytes.
  render(spec, default_bank(), AnalysisFilter{});
  CHECK(read_text_file(r.svg) == svg);
}

TEST_CASE("missing inputs and schema mismatches") {
  testing::TempDir dir;
  FigureSpec spec{"w", FigureKind::waterfall, {}, dir / "w.svg", "", "", "", Slice::nation, "source"};
  CHECK_THROWS_AS(spec.validate(), ReportError);
  spec.inputs["scores"] = dir / "absent.jsonl";
  CHECK_THROWS_AS(spec.validate(), ReportError);
  write_text_file(dir / "bad.jsonl", "{\"label\": 7}\n");
  spec.inputs["scores"] = dir / "bad.jsonl";
  CHECK_THROWS_AS(render(spec, default_bank(), AnalysisFilter{}), ReportError);
  CHECK_FALSE(std::filesystem::exists(dir / "w.json"));
  CHECK_THROWS_AS(parse_figure_kind("pie"), ReportError);
}

TEST_CASE("an unwritable image leaves a valid sidecar") {
  testing::TempDir dir;
  write_projections(dir / "p.jsonl", {0.1, 0.2});
  // The image path is a directory, so writing it fails.
  std::filesystem::create_directories(dir / "img.svg");
  FigureSpec spec{"x", FigureKind::boxpanel, {{"projections", dir / "p.jsonl"}}, dir / "img.svg",
                  "", "", "", Slice::nation, "source"};
  const auto r = render(spec, default_bank(), AnalysisFilter{});
  CHECK_FALSE(r.image_written);
  CHECK_FALSE(r.error.empty());
  CHECK(json::parse(read_text_file(dir / "img.json"))["boxes"].size() == 1);
}

TEST_CASE("manifest parsing") {
  testing::TempDir dir;
  write_text_file(dir / "m.yaml",
                  "figures:\n"
                  "  - name: a\n    kind: scatter\n    inputs: {group_means: gm.csv, regression: r.csv}\n"
                  "  - name: b\n    kind: boxpanel\n    slice: sex\n    series: mode\n"
                  "    inputs: {projections: /abs/p.jsonl}\n    output: out/b.svg\n");
  const auto specs = load_manifest(dir / "m.yaml", "/run");
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].output == std::filesystem::path("/run/figures/a.svg"));
  CHECK(specs[0].inputs.at("group_means") == std::filesystem::path("/run/gm.csv"));
  CHECK(specs[1].slice == Slice::sex);
  CHECK(specs[1].series == "mode");
  CHECK(specs[1].inputs.at("projections") == std::filesystem::path("/abs/p.jsonl"));
  write_text_file(dir / "dup.yaml", "figures:\n  - {name: a, kind: waterfall}\n  - {name: a, kind: waterfall}\n");
  CHECK_THROWS_AS(load_manifest(dir / "dup.yaml", "/run"), ReportError);
  write_text_file(dir / "kind.yaml", "figures:\n  - {name: a, kind: pie}\n");
  CHECK_THROWS_AS(load_manifest(dir / "kind.yaml", "/run"), ReportError);
}

TEST_CASE("scatter fits mirror the regression table and the index lists every figure") {
  testing::TempDir dir;
  write_text_file(dir / "run.yaml",
                  "output_dir: out\nlevels:\n  nations: [German, Nigerian]\n"
                  "llm:\n  samples_per_prompt: 2\n"
                  "wvs:\n  csv: " + (testing::data_dir() / "wvs_synthetic.csv").string() + "\n");
  PipelineHooks hooks;
  hooks.sleep = [](std::chrono::milliseconds) {};
  Pipeline p(load_config(dir / "run.yaml"), hooks);
  for (auto s : kAllStages) p.run(s);
  const auto fits = parse_regression_csv(read_text_file(p.path(artifacts::kRegressionNation)));
  const auto side = json::parse(read_text_file(p.run_dir() / "figures" / "scatter.json"));
  REQUIRE(side["fits"].size() == fits.size());
  for (std::size_t i = 0; i < fits.size(); ++i) {
    CHECK(side["fits"][i]["slope"].get<double>() == fits[i].slope);
    CHECK(side["fits"][i]["nation"] == fits[i].nation);
  }
  CHECK(side["points"].size() == 2 * 6 * 2);
  const auto index = json::parse(read_text_file(p.run_dir() / "figures" / "index.json"));
  CHECK(index.size() == default_manifest(p.run_dir(), true).size());
  for (const auto& e : index) {
    CHECK(e["image_written"] == true);
    CHECK(std::filesystem::exists(p.run_dir() / e["svg"].get<std::string>()));
  }
}

}
