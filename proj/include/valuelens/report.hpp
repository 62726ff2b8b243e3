#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "valuelens/analysis.hpp"
#include "valuelens/jsonl.hpp"

namespace valuelens {

class ReportError : public Error {
 public:
  using Error::Error;
};

enum class FigureKind { waterfall, boxpanel, scatter };
std::string_view to_string(FigureKind k);
FigureKind parse_figure_kind(std::string_view s);

/// One figure to render.
///
/// Inputs by kind:
///   waterfall  scores (score JSONL)
///   boxpanel   projections (projection JSONL), optional wvs (respondent
///              JSONL); `series` is "source" (LLM vs WVS) or "mode" (the
///              three projection modes)
///   scatter    group_means (CSV) and regression (per-nation fits CSV)
struct FigureSpec {
  std::string name;
  FigureKind kind = FigureKind::waterfall;
  std::map<std::string, std::filesystem::path> inputs;
  std::filesystem::path output;  // .svg; the sidecar is the same path with .json
  std::string title;
  std::string x_label;
  std::string y_label;
  Slice slice = Slice::nation;
  std::string series = "source";

  /// Throws ReportError for missing inputs or kind-specific fields.
  void validate() const;
};

struct RenderResult {
  std::filesystem::path svg;
  std::filesystem::path sidecar;
  bool image_written = false;
  std::string error;  // set when the image failed; the sidecar is still valid
};

/// Builds the figure's data, writes the JSON sidecar, then draws the SVG from
/// the sidecar alone.
RenderResult render(const FigureSpec& spec, const ValueBank& bank, const AnalysisFilter& filter);

/// Figure data for a spec, exactly as written to the sidecar.
ordered_json build_sidecar(const FigureSpec& spec, const ValueBank& bank,
                           const AnalysisFilter& filter);

/// Pure function of the sidecar document.
std::string render_svg(const json& sidecar);

/// Reads a manifest (YAML list under `figures:`); relative input and output
/// paths resolve against `run_dir`.
std::vector<FigureSpec> load_manifest(const std::filesystem::path& manifest,
                                      const std::filesystem::path& run_dir);

/// Waterfall, LLM-vs-WVS box panels by nation/age/sex, the per-nation
/// scatter, and the three-mode box panels. WVS-dependent figures are left out
/// when `with_wvs` is false.
std::vector<FigureSpec> default_manifest(const std::filesystem::path& run_dir, bool with_wvs);

/// Renders every figure and writes <run_dir>/figures/index.json.
std::vector<RenderResult> render_manifest(const std::vector<FigureSpec>& specs,
                                          const std::filesystem::path& run_dir,
                                          const ValueBank& bank, const AnalysisFilter& filter);

}  // namespace valuelens
