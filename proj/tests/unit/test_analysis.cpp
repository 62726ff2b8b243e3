#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "testing.hpp"
#include "valuelens/analysis.hpp"

using namespace valuelens;

namespace {

GroupKey key(std::string nation, std::string age, std::string sex) {
  return {std::move(nation), std::move(age), std::move(sex)};
}

GroupMeanRow row(const std::string& nation, int g, double llm, double wvs) {
  return {key(nation, kAgeBrackets[static_cast<std::size_t>(g) % 6], g < 6 ? "man" : "woman"), 1, 1, wvs, llm};
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

const RegressionFit& fit_for(const FixedEffectsResult& r, const std::string& nation) {
  return *std::find_if(r.nations.begin(), r.nations.end(),
                       [&](const RegressionFit& f) { return f.nation == nation; });
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("box statistics") {
  const auto c = box_stats({-1, -1, -1});
  CHECK(c.median == -1);
  CHECK(c.q1 == -1);
  CHECK(c.q3 == -1);
  CHECK(c.whisker_low == -1);
  CHECK(c.whisker_high == -1);
  const auto s = box_stats({2, -1, 0, -2, 1});
  CHECK(s.median == 0);
  CHECK(s.q1 == -1.5);
  CHECK(s.q3 == 1.5);
  CHECK(s.mean == 0);
  CHECK(s.n == 5);
  const auto e = box_stats({1, 2, 3, 4});
  CHECK(e.q1 == 1.5);
  CHECK(e.median == 2.5);
  CHECK(e.q3 == 3.5);
  const auto o = box_stats({0, 1, 1, 1, 2, 2, 2, 3, 40});
  CHECK(o.whisker_high == 3);
  CHECK(o.whisker_low == 0);
  CHECK(o.outliers == 1);
  const auto one = box_stats({0.25});
  CHECK(one.q1 == 0.25);
  CHECK(one.q3 == 0.25);
  CHECK_THROWS(box_stats({}));
}

TEST_CASE("box statistics invariants on random data") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + rng() % 40);
    for (auto& x : v) x = dist(rng);
    const auto s = box_stats(v);
    CHECK(s.q1 <= s.median);
    CHECK(s.median <= s.q3);
    const double iqr = s.q3 - s.q1;
    CHECK(s.whisker_low >= s.q1 - 1.5 * iqr);
    CHECK(s.whisker_high <= s.q3 + 1.5 * iqr);
    CHECK(std::find(v.begin(), v.end(), s.whisker_low) != v.end());
    CHECK(std::find(v.begin(), v.end(), s.whisker_high) != v.end());
    auto shuffled = v;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto p = box_stats(shuffled);
    CHECK(p.median == s.median);
    CHECK(p.q1 == s.q1);
    CHECK(p.q3 == s.q3);
  }
}

TEST_CASE("summaries by slice, ordered, permutation invariant, warn on missing levels") {
  std::vector<Observation> obs;
  std::mt19937_64 rng(9);
  for (const char* nat : {"German", "Czech"}) {
    for (int i = 0; i < 10; ++i) {
      obs.push_back({key(nat, kAgeBrackets[static_cast<std::size_t>(i) % 6], i % 2 ? "man" : "woman"),
                     static_cast<double>(rng() % 100) / 50.0 - 1.0});
    }
  }
  std::vector<std::string> warnings;
  const std::vector<std::string> expected{"German", "Czech", "Japanese"};
  const auto a = summarize(obs, Source::llm, Slice::nation, expected, &warnings);
  REQUIRE(a.size() == 2);
  CHECK(*a[0].key.nation == "Czech");
  CHECK_FALSE(a[0].key.sex.has_value());
  CHECK(a[0].stats.n == 10);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("Japanese") != std::string::npos);
  std::shuffle(obs.begin(), obs.end(), rng);
  CHECK(summaries_csv(summarize(obs, Source::llm, Slice::nation)) == summaries_csv(a));
  CHECK(summarize(obs, Source::wvs, Slice::age).size() == 6);
  CHECK(summarize(obs, Source::wvs, Slice::sex).size() == 2);
}

TEST_CASE("group means pair the full grid and count exclusions") {
  std::vector<Observation> llm, wvs;
  for (const char* nat : {"German", "Czech"}) {
    for (const auto& b : kAgeBrackets) {
      for (const char* sex : {"man", "woman"}) {
        llm.push_back({key(nat, b, sex), 0.5});
        llm.push_back({key(nat, b, sex), -0.5});
        if (!(std::string(nat) == "Czech" && b == "65+")) wvs.push_back({key(nat, b, sex), 1.0});
      }
    }
  }
  wvs.push_back({key("Japanese", "65+", "man"), 0.1});
  const auto m = group_means(llm, wvs);
  CHECK(m.rows.size() == 22);
  CHECK(m.missing_wvs.size() == 2);
  CHECK(m.missing_llm.size() == 1);
  CHECK(m.rows[0].mean_llm == 0.0);
  CHECK(m.rows[0].n_llm == 2);
  CHECK(m.rows[0].mean_wvs == 1.0);
  std::vector<Observation> other{{key("Nigerian", "65+", "man"), 0.0}};
  CHECK_THROWS_AS(group_means(llm, other), AnalysisError);
  CHECK(parse_group_means_csv(group_means_csv(m.rows)).size() == 22);
}

TEST_CASE("regression against statistics-package reference values") {
  const std::vector<double> x{-1.2, -0.8, -0.5, -0.1, 0.0, 0.3, 0.4, 0.9, 1.1, 1.5};
  const std::vector<double> y{-0.9, -1.0, -0.2, -0.3, 0.25, 0.1, 0.6, 0.5, 1.3, 1.2};
  std::vector<GroupMeanRow> rows;
  for (std::size_t i = 0; i < x.size(); ++i) rows.push_back(row("A", static_cast<int>(i), x[i], y[i]));
  const auto r = fixed_effects_regression(rows);
  const auto& f = fit_for(r, "A");
  CHECK(f.slope == doctest::Approx(0.8649303452453058).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(0.016611144760751095).epsilon(1e-10));
  CHECK(f.r_squared == doctest::Approx(0.8962732336235087).epsilon(1e-12));
  CHECK(f.rmse == doctest::Approx(0.23911668029621286).epsilon(1e-12));
  CHECK(f.p_value == doctest::Approx(3.3058799330458005e-05).epsilon(1e-8));
  CHECK(significance_stars(f.p_value) == "***");

  const std::vector<double> x2{-0.64, -0.36, -0.15, 0.13, 0.2, 0.41, 0.48, 0.83, 0.97, 1.25};
  const std::vector<double> y2{0.53, 0.6, 0.755, 0.865, 0.86, 1.015, 1.06, 1.185, 1.325, 1.415};
  for (std::size_t i = 0; i < x2.size(); ++i) rows.push_back(row("B", static_cast<int>(i), x2[i], y2[i]));
  const auto pooled = fixed_effects_regression(rows).pooled;
  CHECK(pooled.slope == doctest::Approx(0.7410782157651047).epsilon(1e-10));
  CHECK(pooled.nation_intercepts[0].second == doctest::Approx(0.03642748547758298).epsilon(1e-9));
  CHECK(pooled.nation_intercepts[1].second == doctest::Approx(0.7297835966812872).epsilon(1e-10));
  CHECK(pooled.slope_p_value == doctest::Approx(1.2024161082570208e-08).epsilon(1e-6));
}

TEST_CASE("per-nation and pooled fits agree with normal equations") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.15);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const char* nations[] = {"American", "Czech", "German", "Japanese", "Nigerian", "Romanian", "Venezuelan", "Vietnamese"};
  std::vector<GroupMeanRow> rows;
  for (int n = 0; n < 8; ++n) {
    const double shift = 0.2 * n - 0.7;
    for (int g = 0; g < 12; ++g) {
      const double x = u(rng);
      rows.push_back(row(nations[n], g, x, 0.6 * x + shift + noise(rng)));
    }
  }
  const auto r = fixed_effects_regression(rows);
  REQUIRE(r.nations.size() == 8);
  for (int n = 0; n < 8; ++n) {
    std::vector<double> X, Y, xs;
    for (const auto& gr : rows) {
      if (*gr.key.nation != nations[n]) continue;
      X.insert(X.end(), {1.0, gr.mean_llm});
      Y.push_back(gr.mean_wvs);
      xs.push_back(gr.mean_llm);
    }
    const auto beta = testing::normal_equations(X, 2, Y);
    const auto& f = fit_for(r, nations[n]);
    CHECK(std::fabs(f.intercept - beta[0]) < 1e-9);
    CHECK(std::fabs(f.slope - beta[1]) < 1e-9);
    double ssr = 0, mean = 0, sst = 0;
    for (double y : Y) mean += y / static_cast<double>(Y.size());
    for (std::size_t i = 0; i < Y.size(); ++i) {
      const double e = Y[i] - beta[0] - beta[1] * xs[i];
      ssr += e * e;
      sst += (Y[i] - mean) * (Y[i] - mean);
    }
    CHECK(std::fabs(f.r_squared - (1.0 - ssr / sst)) < 1e-9);
    CHECK(std::fabs(f.rmse - std::sqrt(ssr / static_cast<double>(Y.size()))) < 1e-9);
    // Simple OLS identity: R^2 is the squared Pearson correlation.
    CHECK(std::fabs(f.r_squared - std::pow(pearson(xs, Y), 2)) < 1e-9);
    CHECK(f.p_value >= 0.0);
    CHECK(f.p_value <= 1.0);
    CHECK(f.n_groups == 12);
  }
  // Pooled: [x, d_1 .. d_8].
  std::vector<double> X, Y;
  for (const auto& gr : rows) {
    std::vector<double> line(9, 0.0);
    line[0] = gr.mean_llm;
    const auto idx = std::find(std::begin(nations), std::end(nations), *gr.key.nation) - std::begin(nations);
    line[1 + static_cast<std::size_t>(idx)] = 1.0;
    X.insert(X.end(), line.begin(), line.end());
    Y.push_back(gr.mean_wvs);
  }
  const auto beta = testing::normal_equations(X, 9, Y);
  CHECK(std::fabs(r.pooled.slope - beta[0]) < 1e-9);
  for (int n = 0; n < 8; ++n) {
    const auto& [name, icpt] = r.pooled.nation_intercepts[static_cast<std::size_t>(n)];
    const auto idx = std::find(std::begin(nations), std::end(nations), name) - std::begin(nations);
    CHECK(std::fabs(icpt - beta[1 + static_cast<std::size_t>(idx)]) < 1e-9);
  }
}

TEST_CASE("shifting one nation moves only its dummy") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<GroupMeanRow> rows;
  for (const char* nat : {"A", "B", "C"}) {
    for (int g = 0; g < 12; ++g) rows.push_back(row(nat, g, u(rng), u(rng)));
  }
  const auto before = fixed_effects_regression(rows).pooled;
  for (auto& r : rows) {
    if (*r.key.nation == "B") r.mean_wvs += 0.37;
  }
  const auto after = fixed_effects_regression(rows).pooled;
  CHECK(std::fabs(after.slope - before.slope) < 1e-12);
  CHECK(std::fabs(after.nation_intercepts[0].second - before.nation_intercepts[0].second) < 1e-12);
  CHECK(std::fabs(after.nation_intercepts[1].second - before.nation_intercepts[1].second - 0.37) < 1e-12);
  CHECK(std::fabs(after.nation_intercepts[2].second - before.nation_intercepts[2].second) < 1e-12);
}

TEST_CASE("exact linear and degenerate nations") {
  std::vector<GroupMeanRow> rows;
  for (int g = 0; g < 12; ++g) rows.push_back(row("Lin", g, 0.1 * g - 0.5, 2.0 * (0.1 * g - 0.5) + 1.0));
  for (int g = 0; g < 12; ++g) rows.push_back(row("Flat", g, 0.25, 0.01 * g));
  rows.push_back(row("Tiny", 0, 0.1, 0.2));
  rows.push_back(row("Tiny", 1, 0.3, 0.1));
  const auto r = fixed_effects_regression(rows);
  const auto& lin = fit_for(r, "Lin");
  CHECK(std::fabs(lin.slope - 2.0) < 1e-12);
  CHECK(std::fabs(lin.intercept - 1.0) < 1e-12);
  CHECK(std::fabs(lin.r_squared - 1.0) < 1e-12);
  CHECK(lin.rmse < 1e-12);
  CHECK_FALSE(lin.degenerate);
  const auto& flat = fit_for(r, "Flat");
  CHECK(flat.degenerate);
  CHECK(flat.r_squared == 0.0);
  CHECK(flat.p_value == 1.0);
  CHECK_FALSE(flat.diagnostic.empty());
  CHECK(fit_for(r, "Tiny").degenerate);
  // Only the usable nation enters the pooled model.
  REQUIRE(r.pooled.nation_intercepts.size() == 1);
  CHECK(std::fabs(r.pooled.slope - 2.0) < 1e-12);
}

TEST_CASE("stars") {
  CHECK(significance_stars(0.2) == "");
  CHECK(significance_stars(0.05) == "");
  CHECK(significance_stars(0.049) == "*");
  CHECK(significance_stars(0.0099) == "**");
  CHECK(significance_stars(0.0009) == "***");
}

TEST_CASE("regression csv round trip and fit table shape") {
  std::vector<GroupMeanRow> rows;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* nat : {"A", "B"}) {
    for (int g = 0; g < 12; ++g) rows.push_back(row(nat, g, u(rng), u(rng)));
  }
  const auto r = fixed_effects_regression(rows);
  const auto back = parse_regression_csv(regression_csv(r.nations));
  REQUIRE(back.size() == 2);
  CHECK(back[0].slope == stable_round(r.nations[0].slope));
  const auto table = fit_table_csv(r.nations);
  CHECK(table.rfind("metric,A,B\n", 0) == 0);
  CHECK(table.find("\nRMSE,") != std::string::npos);
  CHECK(table.find("\nR2,") != std::string::npos);
}

TEST_CASE("variance") {
  CHECK(sample_variance(std::vector<double>{}) == 0.0);
  CHECK(sample_variance(std::vector<double>{3.0}) == 0.0);
  CHECK(sample_variance(std::vector<double>{1.0, 2.0, 3.0, 4.0}) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("ablation: identical premises, per-mode series") {
  const auto profiles = enumerate_profiles(LevelSets::defaults());
  const auto prompts = render_prompts(std::span(profiles).first(4), default_bank());
  std::map<std::string, PromptRecord> index;
  for (const auto& p : prompts) index[p.prompt_id] = p;
  auto build = [&](auto label_for) {
    std::vector<ScoreRecord> out;
    for (const auto& p : prompts) {
      if (p.dimension_id != kGeneralDimension) continue;
      for (int i = 0; i < 3; ++i) {
        for (const auto& h : hypothesis_pairs(default_bank())) {
          out.push_back({p.prompt_id + std::to_string(i), p.prompt_id, i, h.dimension_id, h.polarity,
                         label_for(h, i), "stub"});
        }
      }
    }
    return out;
  };
  AnalysisFilter filter;
  const auto extreme = ablate(build([](const HypothesisEntry& h, int) {
    return h.polarity == Polarity::traditional ? ResonanceLabel::resonance : ResonanceLabel::conflict;
  }), default_bank(), index, filter);
  REQUIRE(extreme.subjects.size() == 12);
  for (const auto& s : extreme.series) {
    for (double v : s.values) CHECK(std::fabs(v + 3.03) < 1e-12);
  }
  const auto neutral = ablate(build([](const HypothesisEntry&, int) { return ResonanceLabel::neutral; }),
                              default_bank(), index, filter);
  for (const auto& s : neutral.series) {
    CHECK(s.variance == 0.0);
    for (double v : s.values) CHECK(v == 0.0);
  }
  std::set<std::string> nats, ages, sexes;
  for (std::size_t i = 0; i < 4; ++i) {
    nats.insert(*profiles[i].nationality);
    ages.insert(*age_bracket(*profiles[i].age));
    sexes.insert(*profiles[i].sex);
  }
  CHECK(neutral.summaries.size() == 3 * (nats.size() + ages.size() + sexes.size()));
  auto partial = build([](const HypothesisEntry&, int) { return ResonanceLabel::neutral; });
  partial.pop_back();
  CHECK_THROWS_AS(ablate(partial, default_bank(), index, filter), AnalysisError);
}

}
