// valuelens command line: one subcommand per pipeline stage.
#include <CLI11.hpp>

#include <iostream>

#include "valuelens/pipeline.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAuth = 3;

int run_stages(const std::string& config_path, const std::string& output_dir,
               std::vector<valuelens::Stage> stages, bool all) {
  using namespace valuelens;
  auto cfg = load_config(config_path, stages);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  Pipeline pipeline(cfg);
  std::cerr << "run directory: " << pipeline.run_dir().string() << "\n";
  ordered_json summary = ordered_json::object();
  summary["run_id"] = cfg.run_id();
  summary["run_dir"] = pipeline.run_dir().string();
  if (all) {
    summary["stages"] = pipeline.run_all();
  } else {
    summary["stage"] = std::string(to_string(stages.front()));
    summary["result"] = pipeline.run(stages.front());
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace valuelens;
  CLI::App app{"valuelens: score LLM responses against World Values Survey value hypotheses"};
  app.require_subcommand(1);
  std::string config_path = "config/run.yaml";
  std::string output_dir;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration (YAML)")->capture_default_str();
    cmd->add_option("--output-dir", output_dir, "Override output_dir from the config");
  };

  struct Entry {
    CLI::App* cmd;
    std::vector<Stage> stages;
    bool all;
  };
  std::vector<Entry> entries;
  const std::pair<Stage, const char*> described[] = {
      {Stage::gen_prompts, "Render the demographic prompt grid"},
      {Stage::collect, "Sample completions for every prompt (resumable)"},
      {Stage::score, "Label every premise against every hypothesis"},
      {Stage::project, "Project scored premises onto the traditional-secular axis"},
      {Stage::ingest_wvs, "Recode a WVS extract into axis positions"},
      {Stage::compare, "Group summaries, group means and regression fits"},
      {Stage::ablate, "Compare the three projection modes"},
      {Stage::report, "Render figures and their data sidecars"},
  };
  for (const auto& [stage, help] : described) {
    auto* cmd = app.add_subcommand(std::string(to_string(stage)), help);
    add_common(cmd);
    entries.push_back({cmd, {stage}, false});
  }
  auto* run = app.add_subcommand("run", "Run every stage in order");
  add_common(run);
  entries.push_back({run, std::vector<Stage>(std::begin(kAllStages), std::end(kAllStages)), true});

  auto* validate = app.add_subcommand("validate", "Check a configuration and print its run id");
  add_common(validate);
  std::vector<std::string> for_stages;
  validate->add_option("--stage", for_stages, "Also check dependencies of these stages");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      std::vector<Stage> stages;
      for (const auto& s : for_stages) stages.push_back(parse_stage(s));
      const auto result = validate_config(config_path, stages);
      if (!result.ok()) {
        for (const auto& i : result.issues) std::cerr << i.to_string(config_path) << "\n";
        return kExitConfig;
      }
      auto cfg = *result.config;
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      freeze(cfg);
      std::cout << "ok run_id=" << cfg.run_id() << " run_dir=" << cfg.run_dir().string() << "\n";
      return 0;
    }
    for (const auto& e : entries) {
      if (e.cmd->parsed()) {
        auto stages = e.stages;
        // `run` skips the WVS stages when no extract is configured.
        if (e.all) {
          const auto probe = validate_config(config_path);
          if (probe.ok() && !probe.config->wvs_csv) {
            std::erase_if(stages, [](Stage s) { return s == Stage::ingest_wvs || s == Stage::compare; });
          }
        }
        return run_stages(config_path, output_dir, stages, e.all);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const AuthenticationError& e) {
    std::cerr << "authentication failed: " << e.what() << "\n";
    return kExitAuth;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
