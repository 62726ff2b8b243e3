#include "valuelens/value_bank.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <set>

#include "valuelens/default_bank_data.hpp"

namespace valuelens {

std::string_view to_string(Polarity p) {
  return p == Polarity::traditional ? "traditional" : "secular";
}

Polarity parse_polarity(std::string_view s) {
  if (s == "traditional") return Polarity::traditional;
  if (s == "secular") return Polarity::secular;
  throw Error("unknown polarity '" + std::string(s) + "'");
}

double ValueBank::total_loading() const {
  double total = 0.0;
  for (const auto& d : dimensions) total += d.factor_loading;
  return total;
}

std::optional<std::size_t> ValueBank::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < dimensions.size(); ++i) {
    if (dimensions[i].id == id) return i;
  }
  return std::nullopt;
}

namespace {

std::string location(std::string_view source, const YAML::Mark& mark) {
  if (mark.is_null()) return std::string(source);
  return std::string(source) + ":" + std::to_string(mark.line + 1) + ":" +
         std::to_string(mark.column + 1);
}

std::string required_string(const YAML::Node& node, const char* key, std::string_view source) {
  const auto value = node[key];
  if (!value) throw BankError(location(source, node.Mark()), std::string("missing field '") + key + "'");
  if (!value.IsScalar()) throw BankError(location(source, value.Mark()), std::string("'") + key + "' must be a string");
  return value.as<std::string>();
}

void check_dimension(const ValueDimension& d, const std::string& where) {
  if (d.id.empty()) throw BankError(where, "dimension id is empty");
  if (d.id == kGeneralDimension) throw BankError(where, "dimension id 'general' is reserved");
  if (!(d.factor_loading > 0.0 && d.factor_loading <= 1.0)) {
    throw BankError(where, "factor_loading for '" + d.id + "' must be in (0, 1], got " +
                               format_number(d.factor_loading));
  }
  if (d.traditional_hypothesis.empty() || d.secular_hypothesis.empty()) {
    throw BankError(where, "dimension '" + d.id + "' has an empty hypothesis");
  }
  if (d.traditional_hypothesis == d.secular_hypothesis) {
    throw BankError(where, "dimension '" + d.id + "' has identical traditional and secular hypotheses");
  }
  if (d.question.empty()) throw BankError(where, "dimension '" + d.id + "' has an empty question");
}

}  // namespace

void validate_bank(const ValueBank& bank, std::string_view source_name) {
  const std::string where(source_name);
  if (bank.dimensions.empty()) throw BankError(where, "bank has no dimensions");
  if (trim(bank.general_prompt).empty()) throw BankError(where, "bank has no general_prompt");
  std::set<std::string> ids;
  for (const auto& d : bank.dimensions) {
    check_dimension(d, where);
    if (!ids.insert(d.id).second) throw BankError(where, "duplicate dimension id '" + d.id + "'");
    if (d.question == bank.general_prompt) {
      throw BankError(where, "general prompt repeated as the question of '" + d.id + "'");
    }
  }
}

ValueBank parse_bank(std::string_view yaml_text, std::string_view source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw BankError(location(source_name, e.mark), e.msg);
  }
  if (!root.IsMap()) throw BankError(std::string(source_name), "bank must be a mapping");

  ValueBank bank;
  bank.general_prompt = required_string(root, "general_prompt", source_name);
  const auto dims = root["dimensions"];
  if (!dims || !dims.IsSequence()) {
    throw BankError(location(source_name, root.Mark()), "'dimensions' must be a list");
  }
  std::set<std::string> ids;
  for (const auto& node : dims) {
    const std::string where = location(source_name, node.Mark());
    if (!node.IsMap()) throw BankError(where, "dimension must be a mapping");
    ValueDimension d;
    d.id = required_string(node, "id", source_name);
    d.wvs_value = required_string(node, "wvs_value", source_name);
    d.question = required_string(node, "question", source_name);
    d.traditional_hypothesis = required_string(node, "traditional_hypothesis", source_name);
    d.secular_hypothesis = required_string(node, "secular_hypothesis", source_name);
    const auto loading = node["factor_loading"];
    if (!loading) throw BankError(where, "missing field 'factor_loading'");
    try {
      d.factor_loading = loading.as<double>();
    } catch (const YAML::Exception&) {
      throw BankError(location(source_name, loading.Mark()), "factor_loading is not a number");
    }
    check_dimension(d, location(source_name, node.Mark()));
    if (!ids.insert(d.id).second) throw BankError(where, "duplicate dimension id '" + d.id + "'");
    bank.dimensions.push_back(std::move(d));
  }
  validate_bank(bank, source_name);
  return bank;
}

ValueBank load_bank(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw BankError(path.string(), e.what());
  }
  return parse_bank(text, path.string());
}

std::string save_bank(const ValueBank& bank) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "general_prompt" << YAML::Value << YAML::DoubleQuoted << bank.general_prompt;
  out << YAML::Key << "dimensions" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : bank.dimensions) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << d.id;
    out << YAML::Key << "wvs_value" << YAML::Value << YAML::DoubleQuoted << d.wvs_value;
    out << YAML::Key << "question" << YAML::Value << YAML::DoubleQuoted << d.question;
    out << YAML::Key << "traditional_hypothesis" << YAML::Value << YAML::DoubleQuoted
        << d.traditional_hypothesis;
    out << YAML::Key << "secular_hypothesis" << YAML::Value << YAML::DoubleQuoted
        << d.secular_hypothesis;
    // Shortest round-trip text, so the loading reloads bit-identically.
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), d.factor_loading);
    out << YAML::Key << "factor_loading" << YAML::Value << std::string(buf.data(), res.ptr);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string_view default_bank_yaml() { return detail::kDefaultBankYaml; }

const ValueBank& default_bank() {
  static const ValueBank bank = parse_bank(detail::kDefaultBankYaml, "<built-in bank>");
  return bank;
}

std::vector<HypothesisEntry> hypothesis_pairs(const ValueBank& bank) {
  std::vector<HypothesisEntry> out;
  out.reserve(2 * bank.dimensions.size());
  for (const auto& d : bank.dimensions) {
    out.push_back({d.traditional_hypothesis, Polarity::traditional, d.factor_loading, d.id});
    out.push_back({d.secular_hypothesis, Polarity::secular, d.factor_loading, d.id});
  }
  return out;
}

}  // namespace valuelens
