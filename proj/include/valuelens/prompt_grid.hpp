#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "valuelens/jsonl.hpp"
#include "valuelens/value_bank.hpp"

namespace valuelens {

/// Persona for a prompt and the key of a survey comparison group. At least
/// one field is present.
struct DemographicProfile {
  std::optional<int> age;
  std::optional<std::string> nationality;
  std::optional<std::string> sex;

  bool full_triple() const { return age && nationality && sex; }
  bool empty() const { return !age && !nationality && !sex; }
  auto operator<=>(const DemographicProfile&) const = default;
};

ordered_json to_json(const DemographicProfile& p);
DemographicProfile profile_from_json(const json& j);

struct LevelSets {
  std::vector<int> ages;
  std::vector<std::string> nations;
  std::vector<std::string> sexes;

  /// Ages {20, 30, 40, 50, 60, 75}, eight nationalities, {man, woman}.
  static LevelSets defaults();
};

/// Bit mask over the three demographic fields.
enum ShapeBits : unsigned { kAge = 1u, kNation = 2u, kSex = 4u };

/// Combination shapes in enumeration order: <age, nationality, sex>,
/// <age, nationality>, <age, sex>, <nationality, sex>, then the singletons.
inline constexpr unsigned kAllShapes[] = {kAge | kNation | kSex, kAge | kNation, kAge | kSex,
                                          kNation | kSex, kAge, kNation, kSex};

/// Every combination of the requested shapes. Throws if a level list needed
/// by a shape is empty or has duplicates.
std::vector<DemographicProfile> enumerate_profiles(const LevelSets& levels,
                                                   std::span<const unsigned> shapes = kAllShapes);

/// Expected |enumerate_profiles| for the full grid: ANS + AN + AS + NS + A + N + S.
std::size_t expected_profile_count(std::size_t ages, std::size_t nations, std::size_t sexes);

/// Throws if the profile is empty or uses a level outside `levels`.
void validate_profile(const DemographicProfile& profile, const LevelSets& levels);

struct PromptRecord {
  DemographicProfile profile;
  std::string dimension_id;  // bank dimension id or "general"
  std::string question;
  std::string rendered_prompt;
  std::string prompt_id;

  bool operator==(const PromptRecord&) const = default;
};

ordered_json to_json(const PromptRecord& r);
PromptRecord prompt_from_json(const json& j);

inline constexpr int kTemplateVersion = 1;

/// Fills the interview template for one persona and question. Missing
/// persona fields are elided.
std::string render_prompt(const DemographicProfile& profile, std::string_view question);

/// Stable id over (profile, dimension id, template version).
std::string make_prompt_id(const DemographicProfile& profile, std::string_view dimension_id);

/// |profiles| x (|dimensions| + 1) records: per profile, the bank dimensions
/// in order followed by the general prompt.
std::vector<PromptRecord> render_prompts(std::span<const DemographicProfile> profiles,
                                         const ValueBank& bank);

}  // namespace valuelens
