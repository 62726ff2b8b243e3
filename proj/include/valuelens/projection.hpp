#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "valuelens/labels.hpp"
#include "valuelens/prompt_grid.hpp"
#include "valuelens/rvr_client.hpp"
#include "valuelens/value_bank.hpp"

namespace valuelens {

class ProjectionError : public Error {
 public:
  using Error::Error;
};

/// Position on the traditional-secular axis; negative is traditional.
struct AxisProjection {
  double value = 0.0;
  ProjectionMode mode = ProjectionMode::combined;
  std::string subject_key;
};

struct DimensionScore {
  std::string dimension_id;
  std::optional<ResonanceLabel> traditional;
  std::optional<ResonanceLabel> secular;
};

/// Loading-weighted sum of one premise's labels:
///   traditional_only: -sum w_i * t_i
///   secular_only:     +sum w_i * s_i
///   combined:          sum (w_i / 2) * (s_i - t_i)
/// Every bank dimension must be scored once, with the polarities the mode
/// reads.
AxisProjection project_premise(std::span<const DimensionScore> scores, const ValueBank& bank,
                               ProjectionMode mode, std::string subject_key = {});

struct RecodedValue {
  std::string dimension_id;
  double value = 0.0;  // in [-1, 1], -1 at the traditional pole
};

/// sum w_i * v_i over the bank; recorded as combined.
AxisProjection project_wvs(std::span<const RecodedValue> values, const ValueBank& bank,
                           std::string subject_key = {});

/// Per-premise projection row as written by the `project` stage.
struct PremiseProjection {
  std::string subject_key;  // premise key
  std::string prompt_id;
  int sample_index = 0;
  std::string dimension_id;  // of the prompt ("general" or a bank id)
  DemographicProfile profile;
  ProjectionMode mode = ProjectionMode::combined;
  double value = 0.0;
};

ordered_json to_json(const PremiseProjection& p);
PremiseProjection projection_from_json(const json& j);
std::vector<PremiseProjection> read_projections(const std::filesystem::path& path);

struct ProjectionBatch {
  std::vector<PremiseProjection> rows;  // premise order (prompt_id, sample_index), then mode
  std::size_t incomplete_premises = 0;
};

/// Groups score records by premise and projects every premise that carries
/// both polarities for every dimension. Premises with gaps are counted, not
/// projected. `prompts` supplies persona and prompt dimension.
ProjectionBatch project_scores(std::span<const ScoreRecord> scores, const ValueBank& bank,
                               std::span<const ProjectionMode> modes,
                               const std::map<std::string, PromptRecord>& prompts,
                               bool parallel = true);

}  // namespace valuelens
