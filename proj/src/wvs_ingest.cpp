#include "valuelens/wvs_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "valuelens/kernels.hpp"

namespace valuelens {

VariableSpec VariableSpec::scale(std::string column, std::string dimension_id, int n_options,
                                 bool invert, std::vector<int> missing_codes) {
  VariableSpec spec{std::move(column), std::move(dimension_id), {}, invert,
                    std::move(missing_codes)};
  for (int c = 1; c <= n_options; ++c) spec.options.push_back(c);
  return spec;
}

void VariableSpec::validate() const {
  if (column.empty()) throw Error("variable spec has no column");
  if (options.size() < 2) throw Error("variable " + column + " needs at least 2 options");
  std::set<int> unique(options.begin(), options.end());
  if (unique.size() != options.size()) throw Error("variable " + column + " repeats an option");
  for (int m : missing_codes) {
    if (unique.contains(m)) {
      throw Error("variable " + column + " lists " + std::to_string(m) + " as option and missing code");
    }
  }
}

double recode_position(std::size_t k, std::size_t n) {
  if (n < 2 || k >= n) throw Error("recode position out of range");
  if (n == 2) return k == 0 ? -1.0 : 1.0;
  const auto kk = static_cast<long long>(k);
  if (n % 2 == 1) {
    const auto mid = static_cast<long long>((n - 1) / 2);
    return static_cast<double>(kk - mid) / static_cast<double>(mid);
  }
  const auto half = static_cast<long long>(n / 2);
  const auto span = static_cast<double>(half - 1);
  if (kk < half) return -static_cast<double>(half - 1 - kk) / span;
  return static_cast<double>(kk - half) / span;
}

double recode_variable(int raw, const VariableSpec& spec) {
  if (std::find(spec.missing_codes.begin(), spec.missing_codes.end(), raw) !=
      spec.missing_codes.end()) {
    throw RecodeError(RecodeError::Kind::missing,
                      spec.column + ": code " + std::to_string(raw) + " marks a missing answer");
  }
  const auto it = std::find(spec.options.begin(), spec.options.end(), raw);
  if (it == spec.options.end()) {
    throw RecodeError(RecodeError::Kind::invalid_code,
                      spec.column + ": code " + std::to_string(raw) + " is not a listed option");
  }
  const auto n = spec.options.size();
  auto k = static_cast<std::size_t>(it - spec.options.begin());
  if (spec.invert) k = n - 1 - k;
  return recode_position(k, n);
}

WvsSchema WvsSchema::wave7_defaults() {
  const std::vector<int> std_missing{-1, -2, -3, -4, -5};
  WvsSchema s;
  s.demographics.nation_labels = {{"DEU", "German"},   {"JPN", "Japanese"},
                                  {"CZE", "Czech"},    {"USA", "American"},
                                  {"ROU", "Romanian"}, {"VNM", "Vietnamese"},
                                  {"VEN", "Venezuelan"}, {"NGA", "Nigerian"}};
  s.demographics.sex_labels = {{"1", "man"}, {"2", "woman"}};
  s.variables.push_back(VariableSpec::scale("Q164", "god", 10, true, std_missing));
  s.variables.push_back(VariableSpec{"Y003", "child", {-2, -1, 0, 1, 2}, false, {-5, -4, -3}});
  s.variables.push_back(VariableSpec::scale("Q184", "abortion", 10, false, std_missing));
  auto pride = VariableSpec::scale("Q254", "pride", 4, false, std_missing);
  pride.missing_codes.push_back(5);  // "I am not <nationality>"
  s.variables.push_back(std::move(pride));
  s.variables.push_back(VariableSpec::scale("Q45", "authority", 3, false, std_missing));
  return s;
}

void WvsSchema::validate(const ValueBank& bank) const {
  std::set<std::string> dims;
  for (const auto& v : variables) {
    v.validate();
    if (!bank.index_of(v.dimension_id)) {
      throw Error("variable " + v.column + " maps to unknown dimension '" + v.dimension_id + "'");
    }
    if (!dims.insert(v.dimension_id).second) {
      throw Error("dimension '" + v.dimension_id + "' mapped by more than one variable");
    }
  }
  for (const auto& d : bank.dimensions) {
    if (!dims.contains(d.id)) throw Error("no survey variable for dimension '" + d.id + "'");
  }
}

std::optional<std::string> age_bracket(int age) {
  if (age < 16) return std::nullopt;
  if (age <= 24) return kAgeBrackets[0];
  if (age <= 34) return kAgeBrackets[1];
  if (age <= 44) return kAgeBrackets[2];
  if (age <= 54) return kAgeBrackets[3];
  if (age <= 64) return kAgeBrackets[4];
  return kAgeBrackets[5];
}

ordered_json to_json(const WvsRespondent& r, const ValueBank& bank) {
  ordered_json j = ordered_json::object();
  j["respondent_id"] = r.respondent_id;
  j["nation"] = r.nation;
  j["age"] = r.age;
  j["age_bracket"] = age_bracket(r.age).value_or("");
  j["sex"] = r.sex;
  ordered_json rec = ordered_json::object();
  for (std::size_t i = 0; i < bank.dimensions.size() && i < r.recoded.size(); ++i) {
    rec[bank.dimensions[i].id] = stable_round(r.recoded[i]);
  }
  j["recoded"] = rec;
  j["projection"] = stable_round(r.projection);
  return j;
}

WvsRespondent respondent_from_json(const json& j, const ValueBank& bank) {
  WvsRespondent r;
  r.respondent_id = j.at("respondent_id").get<std::string>();
  r.nation = j.at("nation").get<std::string>();
  r.age = j.at("age").get<int>();
  r.sex = j.at("sex").get<std::string>();
  const auto& rec = j.at("recoded");
  for (const auto& d : bank.dimensions) r.recoded.push_back(rec.at(d.id).get<double>());
  r.projection = j.at("projection").get<double>();
  return r;
}

std::vector<WvsRespondent> read_respondents(const std::filesystem::path& path,
                                            const ValueBank& bank) {
  std::vector<WvsRespondent> out;
  for (const auto& j : read_jsonl(path)) out.push_back(respondent_from_json(j, bank));
  return out;
}

ordered_json to_json(const DropReport& r) {
  ordered_json j = ordered_json::object();
  j["rows_read"] = r.rows_read;
  j["retained"] = r.retained;
  ordered_json dropped = ordered_json::object();
  for (const char* reason : {"unparseable", "nation", "incomplete", "age"}) {
    dropped[reason] = r.dropped.count(reason) ? r.dropped.at(reason) : 0;
  }
  j["dropped"] = dropped;
  return j;
}

namespace {

enum class Cell { ok, blank, bad };

// Integer cell; accepts integral decimals such as "3.0".
Cell parse_int(const std::string& text, int& out) {
  if (text.empty() || text == "NA") return Cell::blank;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return Cell::bad;
  if (!std::isfinite(v) || std::floor(v) != v || std::fabs(v) > 1e9) return Cell::bad;
  out = static_cast<int>(v);
  return Cell::ok;
}

}  // namespace

IngestResult ingest(std::istream& csv, const WvsSchema& schema, const ValueBank& bank,
                    std::span<const std::string> allowed_nations, bool parallel) {
  schema.validate(bank);
  std::string line;
  if (!std::getline(csv, line)) throw Error("WVS extract is empty (no header row)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("WVS extract is missing required column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto& demo = schema.demographics;
  const std::size_t id_col = column_index(demo.respondent_id);
  const std::size_t nation_col = column_index(demo.nation);
  const std::size_t age_col = column_index(demo.age);
  const std::size_t sex_col = column_index(demo.sex);
  // var_cols[i] is the column for bank dimension i.
  std::vector<std::size_t> var_cols(bank.dimensions.size());
  std::vector<const VariableSpec*> var_specs(bank.dimensions.size());
  for (const auto& v : schema.variables) {
    const auto dim = *bank.index_of(v.dimension_id);
    var_cols[dim] = column_index(v.column);
    var_specs[dim] = &v;
  }

  IngestResult result;
  auto& report = result.report;
  std::vector<double> matrix;
  const std::size_t dims = bank.dimensions.size();

  while (std::getline(csv, line)) {
    if (trim(line).empty()) continue;
    ++report.rows_read;
    std::vector<std::string> cells;
    try {
      cells = split_csv_line(line);
    } catch (const Error&) {
      ++report.dropped["unparseable"];
      continue;
    }
    if (cells.size() != header.size()) {
      ++report.dropped["unparseable"];
      continue;
    }

    int age = 0;
    std::vector<int> raw(dims);
    bool bad = false;
    bool blank = false;
    auto take = [&](std::size_t col, int& out) {
      switch (parse_int(cells[col], out)) {
        case Cell::bad: bad = true; break;
        case Cell::blank: blank = true; break;
        case Cell::ok: break;
      }
    };
    take(age_col, age);
    for (std::size_t i = 0; i < dims; ++i) take(var_cols[i], raw[i]);
    if (bad) {
      ++report.dropped["unparseable"];
      continue;
    }

    const std::string& nation_raw = cells[nation_col];
    std::string nation;
    if (auto it = demo.nation_labels.find(nation_raw); it != demo.nation_labels.end()) {
      nation = it->second;
    } else {
      nation = nation_raw;
    }
    if (std::find(allowed_nations.begin(), allowed_nations.end(), nation) == allowed_nations.end()) {
      ++report.dropped["nation"];
      continue;
    }

    std::string sex;
    if (auto it = demo.sex_labels.find(cells[sex_col]); it != demo.sex_labels.end()) {
      sex = it->second;
    } else if (demo.sex_labels.empty() && !cells[sex_col].empty()) {
      sex = cells[sex_col];
    }
    bool complete = !blank && !sex.empty() && !cells[id_col].empty() && age >= 0;
    std::vector<double> recoded(dims);
    for (std::size_t i = 0; complete && i < dims; ++i) {
      try {
        recoded[i] = recode_variable(raw[i], *var_specs[i]);
      } catch (const RecodeError&) {
        complete = false;
      }
    }
    if (!complete) {
      ++report.dropped["incomplete"];
      continue;
    }
    if (age < demo.min_age) {
      ++report.dropped["age"];
      continue;
    }

    result.respondents.push_back({cells[id_col], nation, age, sex, recoded, 0.0});
    matrix.insert(matrix.end(), recoded.begin(), recoded.end());
  }

  std::vector<double> loadings;
  for (const auto& d : bank.dimensions) loadings.push_back(d.factor_loading);
  std::vector<double> projections(result.respondents.size());
  if (!projections.empty()) {
    if (parallel) {
      kernels::weighted_sum_parallel(matrix, loadings, projections);
    } else {
      kernels::weighted_sum_serial(matrix, loadings, projections);
    }
  }
  for (std::size_t r = 0; r < projections.size(); ++r) {
    result.respondents[r].projection = projections[r];
  }
  report.retained = result.respondents.size();
  return result;
}

IngestResult ingest_file(const std::filesystem::path& path, const WvsSchema& schema,
                         const ValueBank& bank, std::span<const std::string> allowed_nations,
                         bool parallel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open WVS extract " + path.string());
  return ingest(in, schema, bank, allowed_nations, parallel);
}

}  // namespace valuelens
