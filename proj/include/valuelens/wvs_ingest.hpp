#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "valuelens/jsonl.hpp"
#include "valuelens/value_bank.hpp"

namespace valuelens {

/// How one survey column maps onto a bank dimension.
struct VariableSpec {
  std::string column;
  std::string dimension_id;
  /// Valid codes ordered so that, before inversion, the first is the most
  /// traditional answer.
  std::vector<int> options;
  /// Reverse `options` before recoding (scales coded with the traditional
  /// answer last).
  bool invert = false;
  std::vector<int> missing_codes;

  /// Codes 1..n_options.
  static VariableSpec scale(std::string column, std::string dimension_id, int n_options,
                            bool invert, std::vector<int> missing_codes);
  void validate() const;
};

class RecodeError : public Error {
 public:
  enum class Kind { missing, invalid_code };
  RecodeError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Value of the option at 0-based position k (oriented traditional first) on
/// an n-option scale. Extremes map to -1 and +1, the middle option (odd n) or
/// both middle options (even n, n > 2) map to 0, and the steps in between are
/// evenly spaced. A 2-option scale maps to {-1, +1}.
double recode_position(std::size_t k, std::size_t n);

/// Recodes one raw survey answer into [-1, 1], -1 at the traditional pole.
double recode_variable(int raw, const VariableSpec& spec);

struct DemographicColumns {
  std::string respondent_id = "D_INTERVIEW";
  std::string nation = "B_COUNTRY_ALPHA";
  std::string age = "Q262";
  std::string sex = "Q260";
  /// Raw nation code -> nationality label used in prompts ("DEU" -> "German").
  std::map<std::string, std::string> nation_labels;
  /// Raw sex code -> label used in prompts ("1" -> "man").
  std::map<std::string, std::string> sex_labels;
  int min_age = 16;
};

struct WvsSchema {
  DemographicColumns demographics;
  std::vector<VariableSpec> variables;

  /// Wave 7 layout: Q164 (inverted, 10 points), Y003 (-2..2), Q184 (10
  /// points), Q254 (4 points), Q45 (3 points).
  static WvsSchema wave7_defaults();
  /// Throws unless the variables map one-to-one onto the bank dimensions.
  void validate(const ValueBank& bank) const;
};

/// Comparison bracket for an age: 16-24, 25-34, 35-44, 45-54, 55-64, 65+.
std::optional<std::string> age_bracket(int age);
inline const std::vector<std::string> kAgeBrackets = {"16-24", "25-34", "35-44",
                                                      "45-54", "55-64", "65+"};

struct WvsRespondent {
  std::string respondent_id;
  std::string nation;
  int age = 0;
  std::string sex;
  std::vector<double> recoded;  // bank dimension order
  double projection = 0.0;      // combined-mode axis position
};

ordered_json to_json(const WvsRespondent& r, const ValueBank& bank);
WvsRespondent respondent_from_json(const json& j, const ValueBank& bank);
std::vector<WvsRespondent> read_respondents(const std::filesystem::path& path,
                                            const ValueBank& bank);

struct DropReport {
  std::size_t rows_read = 0;
  std::size_t retained = 0;
  /// Keys: unparseable, nation, incomplete, age. Each dropped row is counted
  /// once, under the first reason in that order.
  std::map<std::string, std::size_t> dropped{
      {"unparseable", 0}, {"nation", 0}, {"incomplete", 0}, {"age", 0}};
};

ordered_json to_json(const DropReport& r);

struct IngestResult {
  std::vector<WvsRespondent> respondents;
  DropReport report;
};

/// Streams a CSV extract (header row required) and keeps complete cases from
/// the allowed nations (labels, after nation_labels mapping).
IngestResult ingest(std::istream& csv, const WvsSchema& schema, const ValueBank& bank,
                    std::span<const std::string> allowed_nations, bool parallel = true);
IngestResult ingest_file(const std::filesystem::path& path, const WvsSchema& schema,
                         const ValueBank& bank, std::span<const std::string> allowed_nations,
                         bool parallel = true);

}  // namespace valuelens
