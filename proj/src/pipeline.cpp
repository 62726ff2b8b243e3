#include "valuelens/pipeline.hpp"

#include <algorithm>
#include <cstdlib>

#include "valuelens/analysis.hpp"
#include "valuelens/projection.hpp"
#include "valuelens/report.hpp"
#include "valuelens/wvs_ingest.hpp"

namespace valuelens {

Pipeline::Pipeline(RunConfig config, PipelineHooks hooks)
    : config_(std::move(config)), hooks_(std::move(hooks)), run_dir_(config_.run_dir()) {}

void Pipeline::require(const char* artifact, Stage producer) const {
  if (!std::filesystem::exists(path(artifact))) {
    throw Error(path(artifact).string() + " not found; run '" + std::string(to_string(producer)) +
                "' first");
  }
}

std::vector<PromptRecord> Pipeline::load_prompts() const {
  require(artifacts::kPrompts, Stage::gen_prompts);
  std::vector<PromptRecord> out;
  for (const auto& j : read_jsonl(path(artifacts::kPrompts))) out.push_back(prompt_from_json(j));
  return out;
}

std::map<std::string, PromptRecord> Pipeline::prompt_index() const {
  std::map<std::string, PromptRecord> out;
  for (auto& p : load_prompts()) {
    auto id = p.prompt_id;
    out.emplace(std::move(id), std::move(p));
  }
  return out;
}

ordered_json Pipeline::run(Stage stage) {
  switch (stage) {
    case Stage::gen_prompts: return gen_prompts();
    case Stage::collect: return collect();
    case Stage::score: return score();
    case Stage::project: return project();
    case Stage::ingest_wvs: return ingest_wvs();
    case Stage::compare: return compare();
    case Stage::ablate: return ablate();
    case Stage::report: return report();
  }
  return {};
}

ordered_json Pipeline::run_all() {
  ordered_json out = ordered_json::object();
  for (auto stage : kAllStages) {
    if (!config_.wvs_csv && (stage == Stage::ingest_wvs || stage == Stage::compare)) continue;
    out[std::string(to_string(stage))] = run(stage);
  }
  return out;
}

ordered_json Pipeline::gen_prompts() {
  freeze(config_);
  const auto profiles = enumerate_profiles(config_.levels);
  const auto prompts = render_prompts(profiles, config_.bank);
  std::vector<ordered_json> rows;
  rows.reserve(prompts.size());
  for (const auto& p : prompts) rows.push_back(to_json(p));
  write_jsonl(path(artifacts::kPrompts), rows);
  ordered_json s = ordered_json::object();
  s["profiles"] = profiles.size();
  s["prompts"] = prompts.size();
  s["expected_premises"] =
      prompts.size() * static_cast<std::size_t>(config_.llm.sampling.samples_per_prompt);
  return s;
}

ordered_json Pipeline::collect() {
  freeze(config_);
  const auto prompts = load_prompts();
  std::shared_ptr<CompletionBackend> backend = hooks_.llm;
  if (!backend) {
    if (config_.llm.backend == "http") {
      const char* key = std::getenv(config_.llm.api_key_env.c_str());
      if (!key) throw AuthenticationError("environment variable " + config_.llm.api_key_env + " is not set");
      backend = std::make_shared<HttpCompletionBackend>(HttpCompletionOptions{
          config_.llm.base_url, config_.llm.api_style, key,
          std::chrono::seconds(config_.llm.timeout_seconds)});
    } else {
      std::vector<std::string> dims;
      for (const auto& d : config_.bank.dimensions) dims.push_back(d.id);
      backend = std::make_shared<StubCompletionBackend>(dims, config_.seed);
    }
  }
  PremiseStore store(path(artifacts::kPremises));
  JsonlWriter failures(path(artifacts::kCollectionFailures), JsonlWriter::Mode::truncate);
  CollectOptions opt;
  opt.max_in_flight = config_.llm.max_in_flight;
  opt.retry.max_attempts = config_.llm.max_attempts;
  opt.requests_per_second = config_.llm.requests_per_second;
  if (hooks_.sleep) opt.sleep = hooks_.sleep;
  if (hooks_.clock) opt.clock = hooks_.clock;
  const auto rep = valuelens::collect(prompts, config_.llm.sampling, *backend, store, &failures, opt);
  ordered_json s = ordered_json::object();
  s["backend"] = backend->name();
  s["requested"] = rep.requested;
  s["already_present"] = rep.already_present;
  s["collected"] = rep.collected;
  s["failed"] = rep.failed;
  s["premises"] = store.size();
  return s;
}

ordered_json Pipeline::score() {
  freeze(config_);
  require(artifacts::kPremises, Stage::collect);
  auto premises = read_premises(path(artifacts::kPremises));
  // Collection order depends on thread timing; scoring order must not.
  std::sort(premises.begin(), premises.end(), [](const PremiseRecord& a, const PremiseRecord& b) {
    return std::tie(a.prompt_id, a.sample_index) < std::tie(b.prompt_id, b.sample_index);
  });
  std::shared_ptr<NliBackend> backend = hooks_.nli;
  if (!backend) {
    if (config_.nli.backend == "http") {
      backend = std::make_shared<HttpNliBackend>(HttpNliOptions{
          config_.nli.url, config_.nli.path, config_.nli.model_version,
          std::chrono::seconds(config_.nli.timeout_seconds)});
    } else {
      backend = std::make_shared<StubNliBackend>(config_.bank);
    }
  }
  ScoreCache cache(path(artifacts::kScoreCache));
  JsonlWriter errors(path(artifacts::kScoringErrors), JsonlWriter::Mode::truncate);
  ScoreOptions opt;
  opt.max_in_flight = config_.nli.max_in_flight;
  opt.retry.max_attempts = config_.nli.max_attempts;
  if (hooks_.sleep) opt.sleep = hooks_.sleep;
  const auto hyps = hypothesis_pairs(config_.bank);
  const auto rep = score_dataset(premises, hyps, *backend, &cache, &errors, opt);
  std::vector<ordered_json> rows;
  rows.reserve(rep.records.size());
  for (const auto& r : rep.records) rows.push_back(to_json(r));
  write_jsonl(path(artifacts::kScores), rows);
  ordered_json s = ordered_json::object();
  s["backend"] = backend->name();
  s["model_version"] = backend->model_version();
  s["premises"] = premises.size();
  s["premises_scored"] = rep.premises_scored;
  s["failed_unreachable"] = rep.failed_unreachable;
  s["failed_malformed"] = rep.failed_malformed;
  s["records"] = rep.records.size();
  s["cache_hits"] = rep.cache_hits;
  s["backend_calls"] = rep.backend_calls;
  return s;
}

ordered_json Pipeline::project() {
  freeze(config_);
  require(artifacts::kScores, Stage::score);
  const auto scores = read_scores(path(artifacts::kScores));
  const auto batch = project_scores(scores, config_.bank, kAllModes, prompt_index());
  std::vector<ordered_json> rows;
  rows.reserve(batch.rows.size());
  for (const auto& r : batch.rows) rows.push_back(to_json(r));
  write_jsonl(path(artifacts::kProjections), rows);
  ordered_json s = ordered_json::object();
  s["rows"] = batch.rows.size();
  s["premises"] = batch.rows.size() / std::size(kAllModes);
  s["incomplete_premises"] = batch.incomplete_premises;
  return s;
}

ordered_json Pipeline::ingest_wvs() {
  freeze(config_);
  if (!config_.wvs_csv) throw Error("wvs.csv is not set; 'ingest-wvs' needs a survey extract");
  const auto& nations =
      config_.analysis.nations.empty() ? config_.levels.nations : config_.analysis.nations;
  const auto result = ingest_file(*config_.wvs_csv, config_.wvs_schema, config_.bank, nations);
  std::vector<ordered_json> rows;
  rows.reserve(result.respondents.size());
  for (const auto& r : result.respondents) rows.push_back(to_json(r, config_.bank));
  write_jsonl(path(artifacts::kRespondents), rows);
  const auto report = to_json(result.report);
  write_text_file(path(artifacts::kDropReport), report.dump(2) + "\n");
  return report;
}

namespace {

std::vector<std::string> age_levels(const LevelSets& levels) {
  std::vector<std::string> out;
  for (int a : levels.ages) {
    if (auto b = age_bracket(a); b && std::find(out.begin(), out.end(), *b) == out.end()) {
      out.push_back(*b);
    }
  }
  return out;
}

ordered_json keys_json(const std::vector<GroupKey>& keys) {
  ordered_json out = ordered_json::array();
  for (const auto& k : keys) out.push_back(k.label());
  return out;
}

}  // namespace

ordered_json Pipeline::compare() {
  freeze(config_);
  require(artifacts::kProjections, Stage::project);
  require(artifacts::kRespondents, Stage::ingest_wvs);
  const auto projections = read_projections(path(artifacts::kProjections));
  const auto respondents = read_respondents(path(artifacts::kRespondents), config_.bank);
  const auto& filter = config_.analysis;
  const auto llm = llm_observations(projections, filter);
  const auto wvs = wvs_observations(respondents, filter);
  if (llm.empty()) throw AnalysisError("no LLM projections left after the analysis filter");
  if (wvs.empty()) throw AnalysisError("no WVS respondents left after the analysis filter");

  const auto& nations = filter.nations.empty() ? config_.levels.nations : filter.nations;
  const auto ages = age_levels(config_.levels);
  std::vector<std::string> warnings;
  std::vector<GroupSummary> summaries;
  for (auto slice : {Slice::nation, Slice::age, Slice::sex}) {
    const std::vector<std::string>& expected =
        slice == Slice::nation ? nations : slice == Slice::age ? ages : config_.levels.sexes;
    for (auto* obs : {&llm, &wvs}) {
      const auto source = obs == &llm ? Source::llm : Source::wvs;
      for (auto& g : summarize(*obs, source, slice, expected, &warnings)) summaries.push_back(std::move(g));
    }
  }
  write_text_file(path(artifacts::kSummaries), summaries_csv(summaries));

  const auto means = group_means(llm, wvs);
  write_text_file(path(artifacts::kGroupMeans), group_means_csv(means.rows));
  const auto fits = fixed_effects_regression(means.rows);
  write_text_file(path(artifacts::kRegressionNation), regression_csv(fits.nations));
  write_text_file(path(artifacts::kRegressionPooled), pooled_csv(fits.pooled));
  write_text_file(path(artifacts::kFitTable), fit_table_csv(fits.nations));

  ordered_json diag = ordered_json::object();
  diag["llm_observations"] = llm.size();
  diag["wvs_observations"] = wvs.size();
  diag["groups_paired"] = means.rows.size();
  diag["groups_missing_llm"] = keys_json(means.missing_llm);
  diag["groups_missing_wvs"] = keys_json(means.missing_wvs);
  ordered_json degenerate = ordered_json::array();
  for (const auto& f : fits.nations) {
    if (f.degenerate) degenerate.push_back(ordered_json{{"nation", f.nation}, {"diagnostic", f.diagnostic}});
  }
  diag["degenerate_fits"] = degenerate;
  diag["pooled_degenerate"] = fits.pooled.degenerate;
  diag["warnings"] = warnings;
  write_text_file(path(artifacts::kCompareDiagnostics), diag.dump(2) + "\n");

  ordered_json s = ordered_json::object();
  s["summaries"] = summaries.size();
  s["groups_paired"] = means.rows.size();
  s["groups_excluded"] = means.missing_llm.size() + means.missing_wvs.size();
  s["nations_fitted"] = fits.nations.size();
  s["warnings"] = warnings.size();
  return s;
}

ordered_json Pipeline::ablate() {
  freeze(config_);
  require(artifacts::kScores, Stage::score);
  const auto scores = read_scores(path(artifacts::kScores));
  const auto result = valuelens::ablate(scores, config_.bank, prompt_index(), config_.analysis);
  write_text_file(path(artifacts::kAblationSummaries), ablation_summaries_csv(result.summaries));
  write_text_file(path(artifacts::kAblationVariance), ablation_variance_csv(result));
  ordered_json s = ordered_json::object();
  s["premises"] = result.subjects.size();
  ordered_json var = ordered_json::object();
  for (const auto& series : result.series) var[std::string(to_string(series.mode))] = stable_round(series.variance);
  s["variance"] = var;
  return s;
}

ordered_json Pipeline::report() {
  freeze(config_);
  const bool with_wvs = std::filesystem::exists(path(artifacts::kRespondents)) &&
                        std::filesystem::exists(path(artifacts::kGroupMeans));
  const auto specs = config_.figure_manifest ? load_manifest(*config_.figure_manifest, run_dir_)
                                             : default_manifest(run_dir_, with_wvs);
  const auto results = render_manifest(specs, run_dir_, config_.bank, config_.analysis);
  ordered_json s = ordered_json::object();
  s["figures"] = results.size();
  std::size_t images = 0;
  ordered_json errors = ordered_json::array();
  for (const auto& r : results) {
    if (r.image_written) ++images;
    if (!r.error.empty()) errors.push_back(r.error);
  }
  s["images"] = images;
  s["image_errors"] = errors;
  s["index"] = (run_dir_ / "figures" / "index.json").string();
  return s;
}

}  // namespace valuelens
