#include "valuelens/prompt_grid.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace valuelens {

ordered_json to_json(const DemographicProfile& p) {
  ordered_json j = ordered_json::object();
  j["age"] = p.age ? ordered_json(*p.age) : ordered_json(nullptr);
  j["nationality"] = p.nationality ? ordered_json(*p.nationality) : ordered_json(nullptr);
  j["sex"] = p.sex ? ordered_json(*p.sex) : ordered_json(nullptr);
  return j;
}

DemographicProfile profile_from_json(const json& j) {
  DemographicProfile p;
  if (j.contains("age") && !j["age"].is_null()) p.age = j["age"].get<int>();
  if (j.contains("nationality") && !j["nationality"].is_null()) {
    p.nationality = j["nationality"].get<std::string>();
  }
  if (j.contains("sex") && !j["sex"].is_null()) p.sex = j["sex"].get<std::string>();
  return p;
}

LevelSets LevelSets::defaults() {
  return LevelSets{
      {20, 30, 40, 50, 60, 75},
      {"German", "Japanese", "Czech", "American", "Romanian", "Vietnamese", "Venezuelan",
       "Nigerian"},
      {"man", "woman"},
  };
}

namespace {

template <typename T>
void check_levels(const std::vector<T>& levels, const char* name) {
  if (levels.empty()) throw Error(std::string("level list '") + name + "' is empty");
  std::set<T> seen(levels.begin(), levels.end());
  if (seen.size() != levels.size()) {
    throw Error(std::string("level list '") + name + "' has duplicates");
  }
}

// Indefinite article for the word that follows it.
std::string_view article_for(std::string_view word) {
  if (word.empty()) return "a";
  if (std::isdigit(static_cast<unsigned char>(word.front()))) {
    // "an 8 year old", "an 11 year old", "an 18 year old", "an 80 year old"
    if (word.front() == '8' || word == "11" || word == "18") return "an";
    return "a";
  }
  switch (std::tolower(static_cast<unsigned char>(word.front()))) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return "an";
    default:
      return "a";
  }
}

bool ends_with_terminal_punctuation(std::string_view s) {
  return !s.empty() && (s.back() == '?' || s.back() == '.' || s.back() == '!');
}

}  // namespace

std::vector<DemographicProfile> enumerate_profiles(const LevelSets& levels,
                                                   std::span<const unsigned> shapes) {
  if (shapes.empty()) throw Error("no profile shapes requested");
  unsigned needed = 0;
  for (unsigned s : shapes) {
    if (s == 0 || s > (kAge | kNation | kSex)) throw Error("invalid profile shape");
    needed |= s;
  }
  if (needed & kAge) check_levels(levels.ages, "ages");
  if (needed & kNation) check_levels(levels.nations, "nations");
  if (needed & kSex) check_levels(levels.sexes, "sexes");

  std::vector<DemographicProfile> out;
  std::set<DemographicProfile> seen;
  // Absent dimensions iterate over a single empty slot.
  const std::vector<std::optional<int>> none_age{std::nullopt};
  const std::vector<std::optional<std::string>> none_str{std::nullopt};
  for (unsigned shape : shapes) {
    std::vector<std::optional<int>> ages = none_age;
    std::vector<std::optional<std::string>> nations = none_str;
    std::vector<std::optional<std::string>> sexes = none_str;
    if (shape & kAge) ages.assign(levels.ages.begin(), levels.ages.end());
    if (shape & kNation) nations.assign(levels.nations.begin(), levels.nations.end());
    if (shape & kSex) sexes.assign(levels.sexes.begin(), levels.sexes.end());
    for (const auto& a : ages) {
      for (const auto& n : nations) {
        for (const auto& s : sexes) {
          DemographicProfile p{a, n, s};
          if (seen.insert(p).second) out.push_back(std::move(p));
        }
      }
    }
  }
  return out;
}

std::size_t expected_profile_count(std::size_t a, std::size_t n, std::size_t s) {
  return a * n * s + a * n + a * s + n * s + a + n + s;
}

void validate_profile(const DemographicProfile& p, const LevelSets& levels) {
  if (p.empty()) throw Error("demographic profile has no fields");
  if (p.age && std::find(levels.ages.begin(), levels.ages.end(), *p.age) == levels.ages.end()) {
    throw Error("age " + std::to_string(*p.age) + " is not a configured level");
  }
  if (p.nationality && std::find(levels.nations.begin(), levels.nations.end(), *p.nationality) ==
                           levels.nations.end()) {
    throw Error("nationality '" + *p.nationality + "' is not a configured level");
  }
  if (p.sex && std::find(levels.sexes.begin(), levels.sexes.end(), *p.sex) == levels.sexes.end()) {
    throw Error("sex '" + *p.sex + "' is not a configured level");
  }
}

ordered_json to_json(const PromptRecord& r) {
  ordered_json j = ordered_json::object();
  j["prompt_id"] = r.prompt_id;
  j["profile"] = to_json(r.profile);
  j["dimension_id"] = r.dimension_id;
  j["question"] = r.question;
  j["rendered_prompt"] = r.rendered_prompt;
  return j;
}

PromptRecord prompt_from_json(const json& j) {
  PromptRecord r;
  r.prompt_id = j.at("prompt_id").get<std::string>();
  r.profile = profile_from_json(j.at("profile"));
  r.dimension_id = j.at("dimension_id").get<std::string>();
  r.question = j.at("question").get<std::string>();
  r.rendered_prompt = j.at("rendered_prompt").get<std::string>();
  return r;
}

std::string render_prompt(const DemographicProfile& profile, std::string_view question) {
  std::vector<std::string> persona;
  if (profile.age) {
    persona.push_back(std::to_string(*profile.age));
    persona.push_back("year");
    persona.push_back("old");
  }
  if (profile.nationality) persona.push_back(*profile.nationality);
  if (profile.sex) persona.push_back(*profile.sex);

  std::string out = "You are ";
  if (!persona.empty()) {
    out += article_for(persona.front());
    for (const auto& word : persona) {
      out += ' ';
      out += word;
    }
  } else {
    out += "a person";
  }
  out += " participating in an ethnographic interview. Briefly answer the interviewer's question. Question: ";
  const std::string q = trim(question);
  out += q;
  if (!ends_with_terminal_punctuation(q)) out += '.';
  out += " Response:";
  return out;
}

std::string make_prompt_id(const DemographicProfile& profile, std::string_view dimension_id) {
  std::string key = "v" + std::to_string(kTemplateVersion);
  key += '\x1f';
  key += profile.age ? std::to_string(*profile.age) : std::string();
  key += '\x1f';
  key += profile.nationality.value_or("");
  key += '\x1f';
  key += profile.sex.value_or("");
  key += '\x1f';
  key += dimension_id;
  return short_hash(key);
}

std::vector<PromptRecord> render_prompts(std::span<const DemographicProfile> profiles,
                                         const ValueBank& bank) {
  std::vector<PromptRecord> out;
  out.reserve(profiles.size() * (bank.dimensions.size() + 1));
  auto add = [&](const DemographicProfile& p, std::string_view dim, const std::string& q) {
    out.push_back({p, std::string(dim), q, render_prompt(p, q), make_prompt_id(p, dim)});
  };
  for (const auto& p : profiles) {
    for (const auto& d : bank.dimensions) add(p, d.id, d.question);
    add(p, kGeneralDimension, bank.general_prompt);
  }
  return out;
}

}  // namespace valuelens
