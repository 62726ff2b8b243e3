#include "valuelens/projection.hpp"

#include <cmath>
#include <algorithm>

#include "valuelens/kernels.hpp"

namespace valuelens {

AxisProjection project_premise(std::span<const DimensionScore> scores, const ValueBank& bank,
                               ProjectionMode mode, std::string subject_key) {
  const std::size_t dims = bank.dimensions.size();
  std::vector<std::int8_t> row(2 * dims, 0);
  std::vector<bool> seen(dims, false);
  const bool needs_t = mode != ProjectionMode::secular_only;
  const bool needs_s = mode != ProjectionMode::traditional_only;
  for (const auto& s : scores) {
    const auto idx = bank.index_of(s.dimension_id);
    if (!idx) throw ProjectionError("unknown dimension '" + s.dimension_id + "'");
    if (seen[*idx]) throw ProjectionError("dimension '" + s.dimension_id + "' scored twice");
    seen[*idx] = true;
    if (needs_t && !s.traditional) {
      throw ProjectionError("missing traditional score for '" + s.dimension_id + "'");
    }
    if (needs_s && !s.secular) {
      throw ProjectionError("missing secular score for '" + s.dimension_id + "'");
    }
    if (s.traditional) row[2 * *idx] = static_cast<std::int8_t>(to_int(*s.traditional));
    if (s.secular) row[2 * *idx + 1] = static_cast<std::int8_t>(to_int(*s.secular));
  }
  for (std::size_t i = 0; i < dims; ++i) {
    if (!seen[i]) throw ProjectionError("missing score for dimension '" + bank.dimensions[i].id + "'");
  }
  std::vector<double> loadings;
  for (const auto& d : bank.dimensions) loadings.push_back(d.factor_loading);
  return {kernels::project_row(row.data(), loadings.data(), dims, mode), mode,
          std::move(subject_key)};
}

AxisProjection project_wvs(std::span<const RecodedValue> values, const ValueBank& bank,
                           std::string subject_key) {
  const std::size_t dims = bank.dimensions.size();
  std::vector<std::optional<double>> ordered(dims);
  for (const auto& v : values) {
    const auto idx = bank.index_of(v.dimension_id);
    if (!idx) throw ProjectionError("unknown dimension '" + v.dimension_id + "'");
    if (ordered[*idx]) throw ProjectionError("dimension '" + v.dimension_id + "' given twice");
    if (!std::isfinite(v.value) || v.value < -1.0 || v.value > 1.0) {
      throw ProjectionError("recoded value for '" + v.dimension_id + "' outside [-1, 1]");
    }
    ordered[*idx] = v.value;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < dims; ++i) {
    if (!ordered[i]) throw ProjectionError("missing recoded value for '" + bank.dimensions[i].id + "'");
    acc += bank.dimensions[i].factor_loading * *ordered[i];
  }
  return {acc, ProjectionMode::combined, std::move(subject_key)};
}

ordered_json to_json(const PremiseProjection& p) {
  ordered_json j = ordered_json::object();
  j["subject_key"] = p.subject_key;
  j["prompt_id"] = p.prompt_id;
  j["sample_index"] = p.sample_index;
  j["dimension_id"] = p.dimension_id;
  j["profile"] = to_json(p.profile);
  j["mode"] = to_string(p.mode);
  j["value"] = stable_round(p.value);
  return j;
}

PremiseProjection projection_from_json(const json& j) {
  PremiseProjection p;
  p.subject_key = j.at("subject_key").get<std::string>();
  p.prompt_id = j.at("prompt_id").get<std::string>();
  p.sample_index = j.at("sample_index").get<int>();
  p.dimension_id = j.at("dimension_id").get<std::string>();
  p.profile = profile_from_json(j.at("profile"));
  p.mode = parse_mode(j.at("mode").get<std::string>());
  p.value = j.at("value").get<double>();
  return p;
}

std::vector<PremiseProjection> read_projections(const std::filesystem::path& path) {
  std::vector<PremiseProjection> out;
  for (const auto& j : read_jsonl(path)) out.push_back(projection_from_json(j));
  return out;
}

ProjectionBatch project_scores(std::span<const ScoreRecord> scores, const ValueBank& bank,
                               std::span<const ProjectionMode> modes,
                               const std::map<std::string, PromptRecord>& prompts,
                               bool parallel) {
  const std::size_t dims = bank.dimensions.size();
  const std::size_t width = 2 * dims;

  struct Pending {
    std::string premise_key;
    std::vector<std::int8_t> row;
    std::vector<bool> filled;
  };
  std::map<std::pair<std::string, int>, Pending> premises;
  for (const auto& s : scores) {
    const auto idx = bank.index_of(s.dimension_id);
    if (!idx) throw ProjectionError("score for unknown dimension '" + s.dimension_id + "'");
    auto [it, inserted] = premises.try_emplace({s.prompt_id, s.sample_index});
    auto& p = it->second;
    if (inserted) {
      p.premise_key = s.premise_key;
      p.row.assign(width, 0);
      p.filled.assign(width, false);
    }
    const std::size_t col = 2 * *idx + (s.polarity == Polarity::secular);
    if (p.filled[col]) {
      throw ProjectionError("duplicate score for premise " + s.prompt_id + "#" +
                            std::to_string(s.sample_index));
    }
    p.filled[col] = true;
    p.row[col] = static_cast<std::int8_t>(to_int(s.label));
  }

  ProjectionBatch batch;
  std::vector<const std::pair<const std::pair<std::string, int>, Pending>*> complete;
  std::vector<std::int8_t> matrix;
  for (const auto& entry : premises) {
    if (!prompts.contains(entry.first.first)) {
      throw ProjectionError("scores reference unknown prompt " + entry.first.first);
    }
    const auto& filled = entry.second.filled;
    if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
      ++batch.incomplete_premises;
      continue;
    }
    complete.push_back(&entry);
    matrix.insert(matrix.end(), entry.second.row.begin(), entry.second.row.end());
  }

  std::vector<double> loadings;
  for (const auto& d : bank.dimensions) loadings.push_back(d.factor_loading);
  std::vector<std::vector<double>> values(modes.size(), std::vector<double>(complete.size()));
  for (std::size_t m = 0; m < modes.size(); ++m) {
    if (parallel) {
      kernels::project_parallel(matrix, loadings, modes[m], values[m]);
    } else {
      kernels::project_serial(matrix, loadings, modes[m], values[m]);
    }
  }

  batch.rows.reserve(complete.size() * modes.size());
  for (std::size_t r = 0; r < complete.size(); ++r) {
    const auto& [key, pending] = *complete[r];
    const auto& prompt = prompts.at(key.first);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      batch.rows.push_back({pending.premise_key, key.first, key.second, prompt.dimension_id,
                            prompt.profile, modes[m], values[m][r]});
    }
  }
  return batch;
}

}  // namespace valuelens
