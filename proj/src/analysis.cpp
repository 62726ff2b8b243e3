#include "valuelens/analysis.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace valuelens {

std::string_view to_string(Source s) { return s == Source::llm ? "llm" : "wvs"; }

std::string_view to_string(Slice s) {
  switch (s) {
    case Slice::nation: return "nation";
    case Slice::age: return "age";
    case Slice::sex: return "sex";
  }
  return "nation";
}

Slice parse_slice(std::string_view s) {
  if (s == "nation") return Slice::nation;
  if (s == "age") return Slice::age;
  if (s == "sex") return Slice::sex;
  throw Error("unknown slice '" + std::string(s) + "'");
}

std::string GroupKey::label() const {
  std::string out;
  auto add = [&](const std::optional<std::string>& f) {
    if (!f) return;
    if (!out.empty()) out += '|';
    out += *f;
  };
  add(nation);
  add(age_bracket);
  add(sex);
  return out.empty() ? "all" : out;
}

namespace {

bool nation_allowed(const AnalysisFilter& filter, const std::optional<std::string>& nation) {
  if (filter.nations.empty()) return true;
  return nation && std::find(filter.nations.begin(), filter.nations.end(), *nation) !=
                       filter.nations.end();
}

}  // namespace

std::vector<Observation> llm_observations(std::span<const PremiseProjection> projections,
                                          const AnalysisFilter& filter) {
  std::vector<Observation> out;
  for (const auto& p : projections) {
    if (p.mode != filter.mode) continue;
    if (filter.general_prompt_only && p.dimension_id != kGeneralDimension) continue;
    if (filter.full_triple_only && !p.profile.full_triple()) continue;
    if (!nation_allowed(filter, p.profile.nationality)) continue;
    GroupKey key;
    key.nation = p.profile.nationality;
    if (p.profile.age) key.age_bracket = age_bracket(*p.profile.age);
    key.sex = p.profile.sex;
    out.push_back({std::move(key), p.value});
  }
  return out;
}

std::vector<Observation> wvs_observations(std::span<const WvsRespondent> respondents,
                                          const AnalysisFilter& filter) {
  std::vector<Observation> out;
  for (const auto& r : respondents) {
    if (!nation_allowed(filter, r.nation)) continue;
    out.push_back({GroupKey{r.nation, age_bracket(r.age), r.sex}, r.projection});
  }
  return out;
}

namespace {

double sorted_median(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw AnalysisError("box statistics of an empty group");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  BoxStats s;
  s.n = n;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  s.median = sorted_median(values);
  if (n == 1) {
    s.q1 = s.q3 = s.median;
  } else {
    const std::span<const double> all(values);
    s.q1 = sorted_median(all.subspan(0, n / 2));
    s.q3 = sorted_median(all.subspan((n + 1) / 2));
  }
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = *std::find_if(values.begin(), values.end(), [&](double v) { return v >= lo_fence; });
  s.whisker_high = *std::find_if(values.rbegin(), values.rend(), [&](double v) { return v <= hi_fence; });
  s.outliers = static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [&](double v) { return v < lo_fence || v > hi_fence; }));
  return s;
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

std::vector<GroupSummary> summarize(std::span<const Observation> observations, Source source,
                                    Slice slice, std::span<const std::string> expected_levels,
                                    std::vector<std::string>* warnings) {
  std::map<GroupKey, std::vector<double>> groups;
  for (const auto& o : observations) {
    GroupKey key;
    switch (slice) {
      case Slice::nation: key.nation = o.key.nation; break;
      case Slice::age: key.age_bracket = o.key.age_bracket; break;
      case Slice::sex: key.sex = o.key.sex; break;
    }
    if (!key.nation && !key.age_bracket && !key.sex) continue;
    groups[key].push_back(o.value);
  }
  for (const auto& level : expected_levels) {
    const bool present = std::any_of(groups.begin(), groups.end(), [&](const auto& g) {
      return g.first.label() == level;
    });
    if (!present && warnings) {
      warnings->push_back("no " + std::string(to_string(source)) + " observations for " +
                          std::string(to_string(slice)) + " group '" + level + "'");
    }
  }
  std::vector<GroupSummary> out;
  for (auto& [key, values] : groups) out.push_back({key, source, box_stats(std::move(values))});
  return out;
}

GroupMeansResult group_means(std::span<const Observation> llm, std::span<const Observation> wvs) {
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<GroupKey, Acc> l, w;
  for (const auto& o : llm) {
    if (!o.key.full()) continue;
    auto& a = l[o.key];
    a.sum += o.value;
    ++a.n;
  }
  for (const auto& o : wvs) {
    if (!o.key.full()) continue;
    auto& a = w[o.key];
    a.sum += o.value;
    ++a.n;
  }
  GroupMeansResult out;
  for (const auto& [key, acc] : w) {
    const auto it = l.find(key);
    if (it == l.end()) {
      out.missing_llm.push_back(key);
      continue;
    }
    out.rows.push_back({key, acc.n, it->second.n, acc.sum / static_cast<double>(acc.n),
                        it->second.sum / static_cast<double>(it->second.n)});
  }
  for (const auto& [key, acc] : l) {
    if (!w.contains(key)) out.missing_wvs.push_back(key);
  }
  if (out.rows.empty()) {
    throw AnalysisError("LLM and WVS group grids are disjoint (" + std::to_string(l.size()) +
                        " LLM groups, " + std::to_string(w.size()) +
                        " WVS groups, none shared); check nation labels and filters");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regression

namespace {

struct LinearSolve {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  Eigen::Index rank = 0;
  Eigen::MatrixXd xtx_inverse;
};

LinearSolve solve_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  LinearSolve out;
  out.rank = qr.rank();
  if (out.rank < x.cols()) return out;
  out.beta = qr.solve(y);
  out.residuals = y - x * out.beta;
  const Eigen::MatrixXd xtx = x.transpose() * x;
  out.xtx_inverse = xtx.ldlt().solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  return out;
}

double centered_ss(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  return (y.array() - mean).square().sum();
}

RegressionFit fit_nation(const std::string& nation, const std::vector<const GroupMeanRow*>& rows) {
  RegressionFit fit;
  fit.nation = nation;
  fit.n_groups = rows.size();
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rows[static_cast<std::size_t>(i)]->mean_llm;
    y(i) = rows[static_cast<std::size_t>(i)]->mean_wvs;
  }
  const double sst = n > 0 ? centered_ss(y) : 0.0;
  auto degenerate = [&](std::string why) {
    fit.degenerate = true;
    fit.diagnostic = std::move(why);
    fit.slope = 0.0;
    fit.intercept = n > 0 ? y.mean() : 0.0;
    fit.r_squared = 0.0;
    fit.rmse = n > 0 ? std::sqrt(sst / static_cast<double>(n)) : 0.0;
    fit.p_value = 1.0;
    return fit;
  };
  if (rows.size() < 3) return degenerate("fewer than 3 groups");
  const auto sol = solve_ols(x, y);
  if (sol.rank < 2) return degenerate("mean_llm is constant within the nation");
  if (sst == 0.0) return degenerate("mean_wvs is constant within the nation");

  fit.intercept = sol.beta(0);
  fit.slope = sol.beta(1);
  const double ssr = sol.residuals.squaredNorm();
  fit.r_squared = std::clamp(1.0 - ssr / sst, 0.0, 1.0);
  fit.rmse = std::sqrt(ssr / static_cast<double>(n));
  const double df = static_cast<double>(n - 2);
  if (ssr == 0.0) {
    fit.p_value = 0.0;
  } else {
    const double f = std::max(sst - ssr, 0.0) / (ssr / df);
    boost::math::fisher_f dist(1.0, df);
    fit.p_value = boost::math::cdf(boost::math::complement(dist, f));
  }
  return fit;
}

PooledFit fit_pooled(const std::vector<std::pair<std::string, std::vector<const GroupMeanRow*>>>& nations) {
  PooledFit fit;
  std::size_t n_rows = 0;
  for (const auto& [_, rows] : nations) n_rows += rows.size();
  fit.n_groups = n_rows;
  const auto k = static_cast<Eigen::Index>(nations.size());
  if (k == 0) {
    fit.degenerate = true;
    fit.diagnostic = "no nation has enough groups";
    return fit;
  }
  const auto n = static_cast<Eigen::Index>(n_rows);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, k + 1);
  Eigen::VectorXd y(n);
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    for (const auto* row : nations[static_cast<std::size_t>(j)].second) {
      x(r, 0) = row->mean_llm;
      x(r, j + 1) = 1.0;
      y(r) = row->mean_wvs;
      ++r;
    }
  }
  const auto sol = solve_ols(x, y);
  if (sol.rank < k + 1) {
    fit.degenerate = true;
    fit.diagnostic = "mean_llm has no variation within nations";
    for (const auto& [name, _] : nations) fit.nation_intercepts.emplace_back(name, 0.0);
    return fit;
  }
  fit.slope = sol.beta(0);
  for (Eigen::Index j = 0; j < k; ++j) {
    fit.nation_intercepts.emplace_back(nations[static_cast<std::size_t>(j)].first, sol.beta(j + 1));
  }
  const double ssr = sol.residuals.squaredNorm();
  const double sst = centered_ss(y);
  fit.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;
  fit.rmse = std::sqrt(ssr / static_cast<double>(n));
  const auto df = n - (k + 1);
  if (ssr == 0.0) {
    fit.slope_p_value = 0.0;
  } else if (df <= 0) {
    fit.slope_p_value = 1.0;
    fit.diagnostic = "no residual degrees of freedom";
  } else {
    const double sigma2 = ssr / static_cast<double>(df);
    const double se = std::sqrt(sigma2 * sol.xtx_inverse(0, 0));
    const double t = std::fabs(fit.slope / se);
    boost::math::students_t dist(static_cast<double>(df));
    fit.slope_p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
  }
  return fit;
}

}  // namespace

FixedEffectsResult fixed_effects_regression(std::span<const GroupMeanRow> rows) {
  std::map<std::string, std::vector<const GroupMeanRow*>> by_nation;
  for (const auto& row : rows) {
    if (!row.key.nation) throw AnalysisError("group mean row without nation");
    by_nation[*row.key.nation].push_back(&row);
  }
  FixedEffectsResult out;
  std::vector<std::pair<std::string, std::vector<const GroupMeanRow*>>> eligible;
  for (const auto& [nation, nrows] : by_nation) {
    const bool varies = std::any_of(nrows.begin(), nrows.end(), [&](const GroupMeanRow* r) {
      return r->mean_llm != nrows.front()->mean_llm;
    });
    if (nrows.size() >= 3 && varies) eligible.emplace_back(nation, nrows);
    out.nations.push_back(fit_nation(nation, nrows));
  }
  out.pooled = fit_pooled(eligible);
  return out;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

// ---------------------------------------------------------------------------
// Ablation

AblationResult ablate(std::span<const ScoreRecord> scores, const ValueBank& bank,
                      const std::map<std::string, PromptRecord>& prompts,
                      const AnalysisFilter& filter) {
  const auto batch = project_scores(scores, bank, kAllModes, prompts);
  if (batch.incomplete_premises > 0) {
    throw AnalysisError(std::to_string(batch.incomplete_premises) +
                        " premises lack scores for one or both polarities");
  }
  AblationResult result;
  for (auto mode : kAllModes) result.series.push_back({mode, {}, 0.0});
  std::vector<std::vector<PremiseProjection>> per_mode(3);

  // Rows come grouped per premise in kAllModes order.
  constexpr std::size_t kModes = std::size(kAllModes);
  for (std::size_t r = 0; r + kModes <= batch.rows.size(); r += kModes) {
    const auto& first = batch.rows[r];
    if (filter.general_prompt_only && first.dimension_id != kGeneralDimension) continue;
    if (filter.full_triple_only && !first.profile.full_triple()) continue;
    if (!nation_allowed(filter, first.profile.nationality)) continue;
    result.subjects.push_back(first.prompt_id + "#" + std::to_string(first.sample_index));
    for (std::size_t m = 0; m < kModes; ++m) {
      result.series[m].values.push_back(batch.rows[r + m].value);
      per_mode[m].push_back(batch.rows[r + m]);
    }
  }
  for (std::size_t m = 0; m < kModes; ++m) {
    auto& s = result.series[m];
    s.variance = sample_variance(s.values);
    AnalysisFilter f = filter;
    f.mode = s.mode;
    const auto obs = llm_observations(per_mode[m], f);
    for (auto slice : {Slice::nation, Slice::age, Slice::sex}) {
      for (auto& g : summarize(obs, Source::llm, slice)) result.summaries.emplace_back(s.mode, std::move(g));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string opt(const std::optional<std::string>& s) { return s ? csv_field(*s) : std::string(); }

std::optional<std::string> opt_in(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

std::vector<std::vector<std::string>> parse_table(const std::string& text,
                                                  const std::vector<std::string>& required,
                                                  std::map<std::string, std::size_t>& columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty CSV table");
  const auto header = split_csv_line(line);
  for (std::size_t i = 0; i < header.size(); ++i) columns[header[i]] = i;
  for (const auto& r : required) {
    if (!columns.contains(r)) throw Error("CSV table is missing column '" + r + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw Error("CSV row has the wrong number of fields");
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string summaries_csv(std::span<const GroupSummary> rows) {
  std::string out = "source,nation,age_bracket,sex,n,mean,median,q1,q3,whisker_low,whisker_high,outliers\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.source)) + "," + opt(r.key.nation) + "," + opt(r.key.age_bracket) +
           "," + opt(r.key.sex) + "," + std::to_string(r.stats.n) + "," + format_number(r.stats.mean) +
           "," + format_number(r.stats.median) + "," + format_number(r.stats.q1) + "," +
           format_number(r.stats.q3) + "," + format_number(r.stats.whisker_low) + "," +
           format_number(r.stats.whisker_high) + "," + std::to_string(r.stats.outliers) + "\n";
  }
  return out;
}

std::string group_means_csv(std::span<const GroupMeanRow> rows) {
  std::string out = "nation,age_bracket,sex,n_wvs,n_llm,mean_wvs,mean_llm\n";
  for (const auto& r : rows) {
    out += opt(r.key.nation) + "," + opt(r.key.age_bracket) + "," + opt(r.key.sex) + "," +
           std::to_string(r.n_wvs) + "," + std::to_string(r.n_llm) + "," +
           format_number(r.mean_wvs) + "," + format_number(r.mean_llm) + "\n";
  }
  return out;
}

std::vector<GroupMeanRow> parse_group_means_csv(const std::string& text) {
  std::map<std::string, std::size_t> c;
  const auto rows = parse_table(
      text, {"nation", "age_bracket", "sex", "n_wvs", "n_llm", "mean_wvs", "mean_llm"}, c);
  std::vector<GroupMeanRow> out;
  for (const auto& cells : rows) {
    GroupMeanRow r;
    r.key = {opt_in(cells[c["nation"]]), opt_in(cells[c["age_bracket"]]), opt_in(cells[c["sex"]])};
    r.n_wvs = std::stoul(cells[c["n_wvs"]]);
    r.n_llm = std::stoul(cells[c["n_llm"]]);
    r.mean_wvs = std::stod(cells[c["mean_wvs"]]);
    r.mean_llm = std::stod(cells[c["mean_llm"]]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string regression_csv(std::span<const RegressionFit> fits) {
  std::string out = "nation,n_groups,slope,intercept,r_squared,rmse,p_value,stars,degenerate,diagnostic\n";
  for (const auto& f : fits) {
    out += csv_field(f.nation) + "," + std::to_string(f.n_groups) + "," + format_number(f.slope) +
           "," + format_number(f.intercept) + "," + format_number(f.r_squared) + "," +
           format_number(f.rmse) + "," + format_number(f.p_value) + "," +
           significance_stars(f.p_value) + "," + (f.degenerate ? "true" : "false") + "," +
           csv_field(f.diagnostic) + "\n";
  }
  return out;
}

std::vector<RegressionFit> parse_regression_csv(const std::string& text) {
  std::map<std::string, std::size_t> c;
  const auto rows = parse_table(text,
                                {"nation", "n_groups", "slope", "intercept", "r_squared", "rmse",
                                 "p_value", "degenerate", "diagnostic"},
                                c);
  std::vector<RegressionFit> out;
  for (const auto& cells : rows) {
    RegressionFit f;
    f.nation = cells[c["nation"]];
    f.n_groups = std::stoul(cells[c["n_groups"]]);
    f.slope = std::stod(cells[c["slope"]]);
    f.intercept = std::stod(cells[c["intercept"]]);
    f.r_squared = std::stod(cells[c["r_squared"]]);
    f.rmse = std::stod(cells[c["rmse"]]);
    f.p_value = std::stod(cells[c["p_value"]]);
    f.degenerate = cells[c["degenerate"]] == "true";
    f.diagnostic = cells[c["diagnostic"]];
    out.push_back(std::move(f));
  }
  return out;
}

std::string pooled_csv(const PooledFit& fit) {
  std::string out = "term,estimate\n";
  out += "slope," + format_number(fit.slope) + "\n";
  for (const auto& [nation, b] : fit.nation_intercepts) {
    out += "intercept:" + csv_field(nation) + "," + format_number(b) + "\n";
  }
  out += "r_squared," + format_number(fit.r_squared) + "\n";
  out += "rmse," + format_number(fit.rmse) + "\n";
  out += "slope_p_value," + format_number(fit.slope_p_value) + "\n";
  out += "n_groups," + std::to_string(fit.n_groups) + "\n";
  out += std::string("degenerate,") + (fit.degenerate ? "true" : "false") + "\n";
  return out;
}

std::string fit_table_csv(std::span<const RegressionFit> fits) {
  std::string header = "metric";
  std::string rmse = "RMSE";
  std::string r2 = "R2";
  for (const auto& f : fits) {
    header += "," + csv_field(f.nation);
    rmse += "," + format_number(f.rmse);
    r2 += "," + format_number(f.r_squared) + significance_stars(f.p_value);
  }
  return header + "\n" + rmse + "\n" + r2 + "\n";
}

std::string ablation_summaries_csv(std::span<const std::pair<ProjectionMode, GroupSummary>> rows) {
  std::string out = "mode,nation,age_bracket,sex,n,mean,median,q1,q3,whisker_low,whisker_high,outliers\n";
  for (const auto& [mode, r] : rows) {
    out += std::string(to_string(mode)) + "," + opt(r.key.nation) + "," + opt(r.key.age_bracket) +
           "," + opt(r.key.sex) + "," + std::to_string(r.stats.n) + "," + format_number(r.stats.mean) +
           "," + format_number(r.stats.median) + "," + format_number(r.stats.q1) + "," +
           format_number(r.stats.q3) + "," + format_number(r.stats.whisker_low) + "," +
           format_number(r.stats.whisker_high) + "," + std::to_string(r.stats.outliers) + "\n";
  }
  return out;
}

std::string ablation_variance_csv(const AblationResult& result) {
  std::string out = "mode,n,variance\n";
  for (const auto& s : result.series) {
    out += std::string(to_string(s.mode)) + "," + std::to_string(s.values.size()) + "," +
           format_number(s.variance) + "\n";
  }
  return out;
}

}  // namespace valuelens
