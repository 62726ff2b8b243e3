#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "valuelens/common.hpp"

namespace valuelens {

enum class Polarity { traditional, secular };

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view s);

/// Dimension id used for prompts built from the general value question.
inline constexpr std::string_view kGeneralDimension = "general";

struct ValueDimension {
  std::string id;
  std::string wvs_value;
  std::string question;
  std::string traditional_hypothesis;
  std::string secular_hypothesis;
  double factor_loading = 0.0;

  const std::string& hypothesis(Polarity p) const {
    return p == Polarity::traditional ? traditional_hypothesis : secular_hypothesis;
  }
  bool operator==(const ValueDimension&) const = default;
};

/// Ordered set of value dimensions plus the general value prompt. Immutable
/// once loaded.
struct ValueBank {
  std::vector<ValueDimension> dimensions;
  std::string general_prompt;

  /// Sum of factor loadings; the projection range is [-total, +total].
  double total_loading() const;
  std::optional<std::size_t> index_of(std::string_view id) const;
  bool operator==(const ValueBank&) const = default;
};

/// Bank validation or parse failure; `where` is "file:line:column".
class BankError : public Error {
 public:
  BankError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

ValueBank load_bank(const std::filesystem::path& path);
ValueBank parse_bank(std::string_view yaml_text, std::string_view source_name);
std::string save_bank(const ValueBank& bank);

/// The built-in traditional-secular bank (five dimensions plus the general
/// prompt), parsed from the same text as config/default_bank.yaml.
const ValueBank& default_bank();
std::string_view default_bank_yaml();

/// Throws BankError on the first invariant violation.
void validate_bank(const ValueBank& bank, std::string_view source_name);

struct HypothesisEntry {
  std::string text;
  Polarity polarity;
  double loading;
  std::string dimension_id;

  bool operator==(const HypothesisEntry&) const = default;
};

/// Flattens the bank for scoring: dimension order, traditional before secular.
std::vector<HypothesisEntry> hypothesis_pairs(const ValueBank& bank);

}  // namespace valuelens
