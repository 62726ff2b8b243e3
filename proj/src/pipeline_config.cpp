#include "valuelens/pipeline_config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

namespace valuelens {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::gen_prompts: return "gen-prompts";
    case Stage::collect: return "collect";
    case Stage::score: return "score";
    case Stage::project: return "project";
    case Stage::ingest_wvs: return "ingest-wvs";
    case Stage::compare: return "compare";
    case Stage::ablate: return "ablate";
    case Stage::report: return "report";
  }
  return "gen-prompts";
}

Stage parse_stage(std::string_view s) {
  for (auto st : kAllStages) {
    if (to_string(st) == s) return st;
  }
  throw Error("unknown stage '" + std::string(s) + "'");
}

std::string ConfigIssue::to_string(const std::filesystem::path& file) const {
  std::string out = file.string();
  if (line > 0) out += ":" + std::to_string(line);
  return out + ": " + path + ": " + reason;
}

namespace {

std::string join_issues(const std::filesystem::path& file, const std::vector<ConfigIssue>& issues) {
  std::string out = std::to_string(issues.size()) + " configuration error(s)";
  for (const auto& i : issues) out += "\n  " + i.to_string(file);
  return out;
}

// Collects problems instead of stopping at the first one.
class Reader {
 public:
  std::vector<ConfigIssue> issues;

  void issue(const std::string& path, const std::string& reason, const YAML::Node& at = {}) {
    int line = 0;
    if (at.IsDefined() && at.Mark().line >= 0) line = at.Mark().line + 1;
    issues.push_back({path, reason, line});
  }

  bool map_or_absent(const YAML::Node& n, const std::string& path) {
    if (!n || n.IsNull()) return false;
    if (!n.IsMap()) {
      issue(path, "expected a mapping", n);
      return false;
    }
    return true;
  }

  void known_keys(const YAML::Node& n, const std::string& prefix,
                  std::initializer_list<std::string_view> keys) {
    for (const auto& kv : n) {
      const auto k = kv.first.as<std::string>();
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        issue(prefix.empty() ? k : prefix + "." + k, "unknown key", kv.first);
      }
    }
  }

  template <typename T>
  void scalar(const YAML::Node& parent, const char* key, const std::string& path, T& out,
              const char* expected) {
    const auto n = parent[key];
    if (!n || n.IsNull()) return;
    if (!n.IsScalar()) {
      issue(path, std::string("expected ") + expected, n);
      return;
    }
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      issue(path, std::string("expected ") + expected + ", got '" + n.Scalar() + "'", n);
    }
  }

  template <typename T>
  bool list(const YAML::Node& parent, const char* key, const std::string& path,
            std::vector<T>& out, const char* expected) {
    const auto n = parent[key];
    if (!n || n.IsNull()) return false;
    if (!n.IsSequence()) {
      issue(path, "expected a list", n);
      return false;
    }
    std::vector<T> values;
    bool good = true;
    for (std::size_t i = 0; i < n.size(); ++i) {
      try {
        values.push_back(n[i].as<T>());
      } catch (const YAML::Exception&) {
        issue(path + "[" + std::to_string(i) + "]", std::string("expected ") + expected, n[i]);
        good = false;
      }
    }
    if (good) out = std::move(values);
    return good;
  }

  std::optional<std::filesystem::path> file(const YAML::Node& parent, const char* key,
                                            const std::string& path,
                                            const std::filesystem::path& base) {
    std::string raw;
    scalar(parent, key, path, raw, "a path");
    if (raw.empty()) return std::nullopt;
    std::filesystem::path p(raw);
    if (p.is_relative()) p = base / p;
    p = p.lexically_normal();
    if (!std::filesystem::is_regular_file(p)) {
      issue(path, "file not found: " + p.string(), parent[key]);
      return std::nullopt;
    }
    return p;
  }
};

void read_levels(Reader& r, const YAML::Node& n, RunConfig& c) {
  if (!r.map_or_absent(n, "levels")) return;
  r.known_keys(n, "levels", {"ages", "nations", "sexes"});
  r.list(n, "ages", "levels.ages", c.levels.ages, "an integer");
  r.list(n, "nations", "levels.nations", c.levels.nations, "a string");
  r.list(n, "sexes", "levels.sexes", c.levels.sexes, "a string");
  for (std::size_t i = 0; i < c.levels.ages.size(); ++i) {
    if (c.levels.ages[i] <= 0 || c.levels.ages[i] > 120) {
      r.issue("levels.ages[" + std::to_string(i) + "]", "age out of range", n["ages"][i]);
    }
  }
}

void read_llm(Reader& r, const YAML::Node& n, RunConfig& c) {
  if (!r.map_or_absent(n, "llm")) return;
  r.known_keys(n, "llm",
               {"backend", "base_url", "api_style", "api_key_env", "model", "max_tokens",
                "temperature", "top_p", "samples_per_prompt", "max_in_flight", "max_attempts",
                "requests_per_second", "timeout_seconds"});
  auto& l = c.llm;
  r.scalar(n, "backend", "llm.backend", l.backend, "a string");
  if (l.backend != "stub" && l.backend != "http") {
    r.issue("llm.backend", "must be 'stub' or 'http', got '" + l.backend + "'", n["backend"]);
  }
  r.scalar(n, "base_url", "llm.base_url", l.base_url, "a URL");
  std::string style = "completion";
  r.scalar(n, "api_style", "llm.api_style", style, "a string");
  if (style == "completion") {
    l.api_style = ApiStyle::completion;
  } else if (style == "chat") {
    l.api_style = ApiStyle::chat;
  } else {
    r.issue("llm.api_style", "must be 'completion' or 'chat', got '" + style + "'", n["api_style"]);
  }
  r.scalar(n, "api_key_env", "llm.api_key_env", l.api_key_env, "an environment variable name");
  r.scalar(n, "model", "llm.model", l.sampling.model_name, "a string");
  r.scalar(n, "max_tokens", "llm.max_tokens", l.sampling.max_tokens, "an integer");
  r.scalar(n, "temperature", "llm.temperature", l.sampling.temperature, "a number");
  r.scalar(n, "top_p", "llm.top_p", l.sampling.top_p, "a number");
  r.scalar(n, "samples_per_prompt", "llm.samples_per_prompt", l.sampling.samples_per_prompt,
           "an integer");
  r.scalar(n, "max_in_flight", "llm.max_in_flight", l.max_in_flight, "a positive integer");
  r.scalar(n, "max_attempts", "llm.max_attempts", l.max_attempts, "an integer");
  r.scalar(n, "requests_per_second", "llm.requests_per_second", l.requests_per_second, "a number");
  r.scalar(n, "timeout_seconds", "llm.timeout_seconds", l.timeout_seconds, "an integer");
}

void check_llm(Reader& r, const RunConfig& c, const YAML::Node& n) {
  const auto& l = c.llm;
  const auto& s = l.sampling;
  auto at = [&](const char* key) { return n && n.IsMap() ? n[key] : YAML::Node(); };
  if (s.max_tokens <= 0) r.issue("llm.max_tokens", "must be positive", at("max_tokens"));
  if (s.temperature < 0.0 || s.temperature > 2.0) {
    r.issue("llm.temperature", "must be in [0, 2]", at("temperature"));
  }
  if (s.top_p <= 0.0 || s.top_p > 1.0) r.issue("llm.top_p", "must be in (0, 1]", at("top_p"));
  if (s.samples_per_prompt <= 0) {
    r.issue("llm.samples_per_prompt", "must be positive", at("samples_per_prompt"));
  }
  if (s.model_name.empty()) r.issue("llm.model", "must not be empty", at("model"));
  if (l.max_in_flight == 0) r.issue("llm.max_in_flight", "must be positive", at("max_in_flight"));
  if (l.max_attempts <= 0) r.issue("llm.max_attempts", "must be positive", at("max_attempts"));
  if (l.requests_per_second < 0.0) {
    r.issue("llm.requests_per_second", "must not be negative", at("requests_per_second"));
  }
  if (l.timeout_seconds <= 0) r.issue("llm.timeout_seconds", "must be positive", at("timeout_seconds"));
}

void read_nli(Reader& r, const YAML::Node& n, RunConfig& c) {
  if (!r.map_or_absent(n, "nli")) return;
  r.known_keys(n, "nli",
               {"backend", "url", "path", "model_version", "max_in_flight", "max_attempts",
                "timeout_seconds"});
  auto& s = c.nli;
  r.scalar(n, "backend", "nli.backend", s.backend, "a string");
  if (s.backend != "stub" && s.backend != "http") {
    r.issue("nli.backend", "must be 'stub' or 'http', got '" + s.backend + "'", n["backend"]);
  }
  r.scalar(n, "url", "nli.url", s.url, "a URL");
  r.scalar(n, "path", "nli.path", s.path, "a URL path");
  r.scalar(n, "model_version", "nli.model_version", s.model_version, "a string");
  r.scalar(n, "max_in_flight", "nli.max_in_flight", s.max_in_flight, "a positive integer");
  r.scalar(n, "max_attempts", "nli.max_attempts", s.max_attempts, "an integer");
  r.scalar(n, "timeout_seconds", "nli.timeout_seconds", s.timeout_seconds, "an integer");
  if (s.max_in_flight == 0) r.issue("nli.max_in_flight", "must be positive", n["max_in_flight"]);
  if (s.max_attempts <= 0) r.issue("nli.max_attempts", "must be positive", n["max_attempts"]);
  if (s.timeout_seconds <= 0) r.issue("nli.timeout_seconds", "must be positive", n["timeout_seconds"]);
  if (s.path.empty() || s.path.front() != '/') r.issue("nli.path", "must start with '/'", n["path"]);
}

void read_wvs(Reader& r, const YAML::Node& n, RunConfig& c, const std::filesystem::path& base) {
  if (!r.map_or_absent(n, "wvs")) return;
  r.known_keys(n, "wvs",
               {"csv", "csv_sha256", "min_age", "columns", "nation_labels", "sex_labels",
                "variables"});
  c.wvs_csv = r.file(n, "csv", "wvs.csv", base);
  // Frozen configs pin the extract's contents.
  std::string pinned;
  r.scalar(n, "csv_sha256", "wvs.csv_sha256", pinned, "a hex digest");
  if (c.wvs_csv && !pinned.empty() && sha256_hex(read_text_file(*c.wvs_csv)) != pinned) {
    r.issue("wvs.csv", "contents differ from the pinned csv_sha256", n["csv"]);
  }
  auto& d = c.wvs_schema.demographics;
  r.scalar(n, "min_age", "wvs.min_age", d.min_age, "an integer");
  if (const auto cols = n["columns"]; r.map_or_absent(cols, "wvs.columns")) {
    r.known_keys(cols, "wvs.columns", {"respondent_id", "nation", "age", "sex"});
    r.scalar(cols, "respondent_id", "wvs.columns.respondent_id", d.respondent_id, "a column name");
    r.scalar(cols, "nation", "wvs.columns.nation", d.nation, "a column name");
    r.scalar(cols, "age", "wvs.columns.age", d.age, "a column name");
    r.scalar(cols, "sex", "wvs.columns.sex", d.sex, "a column name");
  }
  for (auto [key, target] : {std::pair{"nation_labels", &d.nation_labels},
                             std::pair{"sex_labels", &d.sex_labels}}) {
    const auto m = n[key];
    const std::string path = std::string("wvs.") + key;
    if (!r.map_or_absent(m, path)) continue;
    std::map<std::string, std::string> labels;
    for (const auto& kv : m) {
      try {
        labels[kv.first.as<std::string>()] = kv.second.as<std::string>();
      } catch (const YAML::Exception&) {
        r.issue(path, "expected code: label pairs", kv.first);
      }
    }
    *target = std::move(labels);
  }
  const auto vars = n["variables"];
  if (!vars || vars.IsNull()) return;
  if (!vars.IsSequence()) {
    r.issue("wvs.variables", "expected a list", vars);
    return;
  }
  std::vector<VariableSpec> specs;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto v = vars[i];
    const std::string path = "wvs.variables[" + std::to_string(i) + "]";
    if (!v.IsMap()) {
      r.issue(path, "expected a mapping", v);
      continue;
    }
    r.known_keys(v, path, {"column", "dimension", "options", "codes", "invert", "missing"});
    VariableSpec spec;
    r.scalar(v, "column", path + ".column", spec.column, "a column name");
    r.scalar(v, "dimension", path + ".dimension", spec.dimension_id, "a dimension id");
    r.scalar(v, "invert", path + ".invert", spec.invert, "true or false");
    r.list(v, "missing", path + ".missing", spec.missing_codes, "an integer");
    if (v["codes"] && v["options"]) {
      r.issue(path, "give either 'options' (count) or 'codes' (list), not both", v);
    } else if (v["codes"]) {
      r.list(v, "codes", path + ".codes", spec.options, "an integer");
    } else {
      int count = 0;
      r.scalar(v, "options", path + ".options", count, "an integer");
      if (count < 2) {
        r.issue(path + ".options", "needs at least 2 options", v);
      } else {
        spec.options.clear();
        for (int k = 1; k <= count; ++k) spec.options.push_back(k);
      }
    }
    if (spec.column.empty()) r.issue(path + ".column", "required", v);
    if (spec.dimension_id.empty()) r.issue(path + ".dimension", "required", v);
    try {
      if (!spec.options.empty()) spec.validate();
    } catch (const Error& e) {
      r.issue(path, e.what(), v);
    }
    specs.push_back(std::move(spec));
  }
  c.wvs_schema.variables = std::move(specs);
}

void read_analysis(Reader& r, const YAML::Node& n, RunConfig& c) {
  if (!r.map_or_absent(n, "analysis")) return;
  r.known_keys(n, "analysis", {"general_prompt_only", "full_triple_only", "mode", "nations"});
  auto& a = c.analysis;
  r.scalar(n, "general_prompt_only", "analysis.general_prompt_only", a.general_prompt_only,
           "true or false");
  r.scalar(n, "full_triple_only", "analysis.full_triple_only", a.full_triple_only,
           "true or false");
  std::string mode(to_string(a.mode));
  r.scalar(n, "mode", "analysis.mode", mode, "a projection mode");
  try {
    a.mode = parse_mode(mode);
  } catch (const Error&) {
    r.issue("analysis.mode",
            "must be one of combined, traditional_only, secular_only; got '" + mode + "'",
            n["mode"]);
  }
  r.list(n, "nations", "analysis.nations", a.nations, "a nationality");
}

void check_cross_refs(Reader& r, const RunConfig& c, const YAML::Node& root,
                      std::span<const Stage> stages) {
  try {
    enumerate_profiles(c.levels);
  } catch (const Error& e) {
    r.issue("levels", e.what(), root["levels"]);
  }
  for (std::size_t i = 0; i < c.analysis.nations.size(); ++i) {
    const auto& nat = c.analysis.nations[i];
    if (std::find(c.levels.nations.begin(), c.levels.nations.end(), nat) == c.levels.nations.end()) {
      const auto list = root["analysis"]["nations"];
      r.issue("analysis.nations[" + std::to_string(i) + "]",
              "unknown nation '" + nat + "' (not in levels.nations)",
              list && list.IsSequence() ? list[i] : YAML::Node());
    }
  }
  auto wants = [&](Stage s) { return std::find(stages.begin(), stages.end(), s) != stages.end(); };
  const bool needs_wvs = wants(Stage::ingest_wvs) || wants(Stage::compare);
  if (needs_wvs && !c.wvs_csv && !(root["wvs"] && root["wvs"]["csv"])) {
    for (auto s : {Stage::ingest_wvs, Stage::compare}) {
      if (wants(s)) {
        r.issue("wvs.csv", "required by stage '" + std::string(to_string(s)) + "'", root["wvs"]);
      }
    }
  }
  if (needs_wvs || c.wvs_csv) {
    try {
      c.wvs_schema.validate(c.bank);
    } catch (const Error& e) {
      r.issue("wvs.variables", e.what(), root["wvs"]);
    }
    // Labels must match the prompt levels or the comparison grid never meets.
    for (const auto& [code, label] : c.wvs_schema.demographics.sex_labels) {
      if (std::find(c.levels.sexes.begin(), c.levels.sexes.end(), label) == c.levels.sexes.end()) {
        r.issue("wvs.sex_labels." + code, "label '" + label + "' is not in levels.sexes",
                root["wvs"]);
      }
    }
  }
  if (wants(Stage::collect) && c.llm.backend == "http") {
    if (c.llm.base_url.empty()) r.issue("llm.base_url", "required by stage 'collect' with the http backend");
    if (c.llm.api_key_env.empty() || !std::getenv(c.llm.api_key_env.c_str())) {
      r.issue("llm.api_key_env",
              "environment variable '" + c.llm.api_key_env + "' is not set (needed by stage 'collect')");
    }
  }
  if (wants(Stage::score) && c.nli.backend == "http" && c.nli.url.empty()) {
    r.issue("nli.url", "required by stage 'score' with the http backend");
  }
}

std::string file_digest(const std::optional<std::filesystem::path>& p) {
  return p ? sha256_hex(read_text_file(*p)) : std::string();
}

void emit_schema(YAML::Emitter& out, const WvsSchema& s) {
  const auto& d = s.demographics;
  out << YAML::Key << "min_age" << YAML::Value << d.min_age;
  out << YAML::Key << "columns" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "respondent_id" << YAML::Value << d.respondent_id;
  out << YAML::Key << "nation" << YAML::Value << d.nation;
  out << YAML::Key << "age" << YAML::Value << d.age;
  out << YAML::Key << "sex" << YAML::Value << d.sex;
  out << YAML::EndMap;
  for (auto [key, labels] : {std::pair{"nation_labels", &d.nation_labels},
                             std::pair{"sex_labels", &d.sex_labels}}) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    for (const auto& [code, label] : *labels) {
      out << YAML::Key << YAML::DoubleQuoted << code << YAML::Value << label;
    }
    out << YAML::EndMap;
  }
  out << YAML::Key << "variables" << YAML::Value << YAML::BeginSeq;
  for (const auto& v : s.variables) {
    out << YAML::BeginMap;
    out << YAML::Key << "column" << YAML::Value << v.column;
    out << YAML::Key << "dimension" << YAML::Value << v.dimension_id;
    out << YAML::Key << "codes" << YAML::Value << YAML::Flow << v.options;
    out << YAML::Key << "invert" << YAML::Value << v.invert;
    out << YAML::Key << "missing" << YAML::Value << YAML::Flow << v.missing_codes;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
}

// Everything that shapes artifact content. `with_locations` adds the
// machine-specific paths that the run id deliberately ignores.
std::string emit(const RunConfig& c, bool with_locations) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  if (with_locations) {
    out << YAML::Key << "output_dir" << YAML::Value << c.output_dir.string();
    out << YAML::Key << "bank" << YAML::Value << "bank.frozen.yaml";
  }
  out << YAML::Key << "bank_sha256" << YAML::Value << sha256_hex(save_bank(c.bank));
  out << YAML::Key << "levels" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ages" << YAML::Value << YAML::Flow << c.levels.ages;
  out << YAML::Key << "nations" << YAML::Value << YAML::Flow << c.levels.nations;
  out << YAML::Key << "sexes" << YAML::Value << YAML::Flow << c.levels.sexes;
  out << YAML::EndMap;

  const auto& l = c.llm;
  out << YAML::Key << "llm" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "backend" << YAML::Value << l.backend;
  out << YAML::Key << "base_url" << YAML::Value << l.base_url;
  out << YAML::Key << "api_style" << YAML::Value
      << (l.api_style == ApiStyle::chat ? "chat" : "completion");
  out << YAML::Key << "api_key_env" << YAML::Value << l.api_key_env;
  out << YAML::Key << "model" << YAML::Value << l.sampling.model_name;
  out << YAML::Key << "max_tokens" << YAML::Value << l.sampling.max_tokens;
  out << YAML::Key << "temperature" << YAML::Value << format_number(l.sampling.temperature);
  out << YAML::Key << "top_p" << YAML::Value << format_number(l.sampling.top_p);
  out << YAML::Key << "samples_per_prompt" << YAML::Value << l.sampling.samples_per_prompt;
  if (with_locations) {
    // Throughput knobs; they do not change what gets collected.
    out << YAML::Key << "max_in_flight" << YAML::Value << l.max_in_flight;
    out << YAML::Key << "max_attempts" << YAML::Value << l.max_attempts;
    out << YAML::Key << "requests_per_second" << YAML::Value << format_number(l.requests_per_second);
    out << YAML::Key << "timeout_seconds" << YAML::Value << l.timeout_seconds;
  }
  out << YAML::EndMap;

  const auto& n = c.nli;
  out << YAML::Key << "nli" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "backend" << YAML::Value << n.backend;
  out << YAML::Key << "url" << YAML::Value << n.url;
  out << YAML::Key << "path" << YAML::Value << n.path;
  out << YAML::Key << "model_version" << YAML::Value << n.model_version;
  if (with_locations) {
    out << YAML::Key << "max_in_flight" << YAML::Value << n.max_in_flight;
    out << YAML::Key << "max_attempts" << YAML::Value << n.max_attempts;
    out << YAML::Key << "timeout_seconds" << YAML::Value << n.timeout_seconds;
  }
  out << YAML::EndMap;

  out << YAML::Key << "wvs" << YAML::Value << YAML::BeginMap;
  if (with_locations && c.wvs_csv) out << YAML::Key << "csv" << YAML::Value << c.wvs_csv->string();
  out << YAML::Key << "csv_sha256" << YAML::Value << file_digest(c.wvs_csv);
  emit_schema(out, c.wvs_schema);
  out << YAML::EndMap;

  const auto& a = c.analysis;
  out << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "general_prompt_only" << YAML::Value << a.general_prompt_only;
  out << YAML::Key << "full_triple_only" << YAML::Value << a.full_triple_only;
  out << YAML::Key << "mode" << YAML::Value << std::string(to_string(a.mode));
  out << YAML::Key << "nations" << YAML::Value << YAML::Flow << a.nations;
  out << YAML::EndMap;

  out << YAML::Key << "report" << YAML::Value << YAML::BeginMap;
  if (with_locations && c.figure_manifest) {
    out << YAML::Key << "manifest" << YAML::Value << c.figure_manifest->string();
  }
  out << YAML::Key << "manifest_sha256" << YAML::Value << file_digest(c.figure_manifest);
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace

std::string RunConfig::frozen_yaml() const {
  return "# Effective configuration, written by valuelens. Do not edit.\n" + emit(*this, true);
}

std::string RunConfig::run_id() const { return short_hash(emit(*this, false)); }

std::filesystem::path RunConfig::run_dir() const { return output_dir / ("run-" + run_id()); }

ConfigError::ConfigError(const std::filesystem::path& file, std::vector<ConfigIssue> issues)
    : Error(join_issues(file, issues)), issues_(std::move(issues)) {}

ValidationResult validate_config_text(std::string_view yaml, const std::filesystem::path& source,
                                      std::span<const Stage> stages) {
  ValidationResult result;
  Reader r;
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    result.issues.push_back({"(document)", e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0});
    return result;
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) {
    result.issues.push_back({"(document)", "expected a mapping at top level", 1});
    return result;
  }
  const auto base = std::filesystem::absolute(source).parent_path();
  RunConfig c;
  c.source = std::filesystem::absolute(source);
  r.known_keys(root, "",
               {"seed", "output_dir", "bank", "bank_sha256", "levels", "llm", "nli", "wvs",
                "analysis", "report"});
  r.scalar(root, "seed", "seed", c.seed, "a non-negative integer");
  std::string out_dir = "runs";
  r.scalar(root, "output_dir", "output_dir", out_dir, "a path");
  c.output_dir = std::filesystem::path(out_dir).is_absolute() ? std::filesystem::path(out_dir)
                                                              : (base / out_dir).lexically_normal();
  c.bank_path = r.file(root, "bank", "bank", base);
  c.bank = default_bank();
  if (c.bank_path) {
    try {
      c.bank = load_bank(*c.bank_path);
    } catch (const BankError& e) {
      r.issue("bank", e.what(), root["bank"]);
    }
  }
  read_levels(r, root["levels"], c);
  read_llm(r, root["llm"], c);
  check_llm(r, c, root["llm"]);
  read_nli(r, root["nli"], c);
  read_wvs(r, root["wvs"], c, base);
  read_analysis(r, root["analysis"], c);
  if (const auto rep = root["report"]; r.map_or_absent(rep, "report")) {
    r.known_keys(rep, "report", {"manifest", "manifest_sha256"});
    c.figure_manifest = r.file(rep, "manifest", "report.manifest", base);
  }
  check_cross_refs(r, c, root, stages);

  result.issues = std::move(r.issues);
  std::stable_sort(result.issues.begin(), result.issues.end(),
                   [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
  if (result.issues.empty()) result.config = std::move(c);
  return result;
}

ValidationResult validate_config(const std::filesystem::path& file, std::span<const Stage> stages) {
  std::string text;
  try {
    text = read_text_file(file);
  } catch (const Error& e) {
    ValidationResult r;
    r.issues.push_back({"(file)", e.what(), 0});
    return r;
  }
  return validate_config_text(text, file, stages);
}

RunConfig load_config(const std::filesystem::path& file, std::span<const Stage> stages) {
  auto result = validate_config(file, stages);
  if (!result.ok()) throw ConfigError(file, std::move(result.issues));
  return std::move(*result.config);
}

void freeze(const RunConfig& config) {
  const auto dir = config.run_dir();
  std::filesystem::create_directories(dir);
  write_text_file(dir / "bank.frozen.yaml", save_bank(config.bank));
  write_text_file(dir / "config.frozen.yaml", config.frozen_yaml());
}

}  // namespace valuelens
