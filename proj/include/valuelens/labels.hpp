#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "valuelens/common.hpp"

namespace valuelens {

/// Value-resonance label for one (premise, hypothesis) pair.
enum class ResonanceLabel : std::int8_t { conflict = -1, neutral = 0, resonance = 1 };

inline int to_int(ResonanceLabel l) { return static_cast<int>(l); }

inline ResonanceLabel label_from_int(long long v) {
  if (v < -1 || v > 1) throw Error("resonance label out of range: " + std::to_string(v));
  return static_cast<ResonanceLabel>(v);
}

/// Which hypotheses feed an axis projection.
enum class ProjectionMode { traditional_only, secular_only, combined };

inline constexpr ProjectionMode kAllModes[] = {ProjectionMode::traditional_only,
                                               ProjectionMode::secular_only,
                                               ProjectionMode::combined};

inline std::string_view to_string(ProjectionMode m) {
  switch (m) {
    case ProjectionMode::traditional_only: return "traditional_only";
    case ProjectionMode::secular_only: return "secular_only";
    case ProjectionMode::combined: return "combined";
  }
  return "combined";
}

inline ProjectionMode parse_mode(std::string_view s) {
  if (s == "traditional_only") return ProjectionMode::traditional_only;
  if (s == "secular_only") return ProjectionMode::secular_only;
  if (s == "combined") return ProjectionMode::combined;
  throw Error("unknown projection mode '" + std::string(s) + "'");
}

}  // namespace valuelens
