#include "valuelens/report.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace valuelens {

std::string_view to_string(FigureKind k) {
  switch (k) {
    case FigureKind::waterfall: return "waterfall";
    case FigureKind::boxpanel: return "boxpanel";
    case FigureKind::scatter: return "scatter";
  }
  return "waterfall";
}

FigureKind parse_figure_kind(std::string_view s) {
  if (s == "waterfall") return FigureKind::waterfall;
  if (s == "boxpanel") return FigureKind::boxpanel;
  if (s == "scatter") return FigureKind::scatter;
  throw ReportError("unknown figure kind '" + std::string(s) + "'");
}

void FigureSpec::validate() const {
  auto require = [&](const char* role) {
    const auto it = inputs.find(role);
    if (it == inputs.end()) {
      throw ReportError("figure '" + name + "' needs input '" + role + "'");
    }
    if (!std::filesystem::exists(it->second)) {
      throw ReportError("figure '" + name + "': input " + it->second.string() + " does not exist");
    }
  };
  if (output.empty()) throw ReportError("figure '" + name + "' has no output path");
  switch (kind) {
    case FigureKind::waterfall:
      require("scores");
      break;
    case FigureKind::boxpanel:
      require("projections");
      if (series != "source" && series != "mode") {
        throw ReportError("figure '" + name + "': series must be 'source' or 'mode'");
      }
      if (inputs.contains("wvs")) require("wvs");
      break;
    case FigureKind::scatter:
      require("group_means");
      require("regression");
      break;
  }
}

namespace {

ordered_json stats_json(const BoxStats& s) {
  ordered_json j = ordered_json::object();
  j["n"] = s.n;
  j["mean"] = stable_round(s.mean);
  j["median"] = stable_round(s.median);
  j["q1"] = stable_round(s.q1);
  j["q3"] = stable_round(s.q3);
  j["whisker_low"] = stable_round(s.whisker_low);
  j["whisker_high"] = stable_round(s.whisker_high);
  j["outliers"] = s.outliers;
  return j;
}

template <typename Fn>
auto with_schema_check(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ReportError("schema mismatch in " + path.string() + ": " + e.what());
  } catch (const ReportError&) {
    throw;
  } catch (const Error& e) {
    throw ReportError("schema mismatch in " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ReportError("schema mismatch in " + path.string() + ": " + e.what());
  }
}

ordered_json waterfall_sidecar(const FigureSpec& spec, const ValueBank& bank) {
  const auto& path = spec.inputs.at("scores");
  const auto scores = with_schema_check(path, [&] { return read_scores(path); });
  if (scores.empty()) throw ReportError("no scores in " + path.string());
  const auto tallies = with_schema_check(path, [&] { return waterfall_stats(scores, bank); });

  std::vector<std::size_t> order(tallies.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Waterfall order: most non-neutral first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tallies[a].resonance + tallies[a].conflict > tallies[b].resonance + tallies[b].conflict;
  });
  ordered_json rows = ordered_json::array();
  for (std::size_t i : order) {
    const auto& t = tallies[i];
    ordered_json r = ordered_json::object();
    r["index"] = i + 1;
    r["dimension_id"] = t.dimension_id;
    r["polarity"] = to_string(t.polarity);
    r["hypothesis"] = t.hypothesis;
    r["n"] = t.total();
    r["resonance"] = t.resonance;
    r["neutral"] = t.neutral;
    r["conflict"] = t.conflict;
    r["resonance_fraction"] = stable_round(t.resonance_fraction());
    r["neutral_fraction"] = stable_round(t.neutral_fraction());
    r["conflict_fraction"] = stable_round(t.conflict_fraction());
    rows.push_back(r);
  }
  ordered_json j = ordered_json::object();
  j["hypotheses"] = rows;
  return j;
}

ordered_json boxpanel_sidecar(const FigureSpec& spec, const AnalysisFilter& filter,
                              const ValueBank& bank) {
  const auto& ppath = spec.inputs.at("projections");
  const auto projections = with_schema_check(ppath, [&] { return read_projections(ppath); });
  ordered_json boxes = ordered_json::array();
  auto add = [&](const std::vector<GroupSummary>& summaries, const std::string& series) {
    for (const auto& g : summaries) {
      ordered_json b = ordered_json::object();
      b["group"] = g.key.label();
      b["series"] = series;
      b["stats"] = stats_json(g.stats);
      boxes.push_back(b);
    }
  };
  std::vector<std::pair<std::string, std::vector<GroupSummary>>> series;
  if (spec.series == "mode") {
    for (auto mode : kAllModes) {
      AnalysisFilter f = filter;
      f.mode = mode;
      series.emplace_back(std::string(to_string(mode)),
                          summarize(llm_observations(projections, f), Source::llm, spec.slice));
    }
  } else {
    series.emplace_back("llm", summarize(llm_observations(projections, filter), Source::llm, spec.slice));
    if (spec.inputs.contains("wvs")) {
      const auto& wpath = spec.inputs.at("wvs");
      const auto respondents = with_schema_check(wpath, [&] { return read_respondents(wpath, bank); });
      series.emplace_back("wvs", summarize(wvs_observations(respondents, filter), Source::wvs, spec.slice));
    }
  }
  // Interleave series per group so boxes for one group sit together.
  std::set<std::string> groups;
  for (const auto& [_, s] : series) {
    for (const auto& g : s) groups.insert(g.key.label());
  }
  for (const auto& group : groups) {
    for (const auto& [name, s] : series) {
      std::vector<GroupSummary> one;
      for (const auto& g : s) {
        if (g.key.label() == group) one.push_back(g);
      }
      add(one, name);
    }
  }
  ordered_json j = ordered_json::object();
  j["slice"] = to_string(spec.slice);
  j["series_by"] = spec.series;
  j["boxes"] = boxes;
  return j;
}

ordered_json scatter_sidecar(const FigureSpec& spec) {
  const auto& gpath = spec.inputs.at("group_means");
  const auto& rpath = spec.inputs.at("regression");
  const auto rows = with_schema_check(gpath, [&] { return parse_group_means_csv(read_text_file(gpath)); });
  const auto fits = with_schema_check(rpath, [&] { return parse_regression_csv(read_text_file(rpath)); });
  ordered_json points = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json p = ordered_json::object();
    p["nation"] = r.key.nation.value_or("");
    p["group"] = r.key.label();
    p["x"] = stable_round(r.mean_llm);
    p["y"] = stable_round(r.mean_wvs);
    points.push_back(p);
  }
  ordered_json lines = ordered_json::array();
  for (const auto& f : fits) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& r : rows) {
      if (r.key.nation != f.nation) continue;
      lo = any ? std::min(lo, r.mean_llm) : r.mean_llm;
      hi = any ? std::max(hi, r.mean_llm) : r.mean_llm;
      any = true;
    }
    ordered_json l = ordered_json::object();
    l["nation"] = f.nation;
    l["slope"] = stable_round(f.slope);
    l["intercept"] = stable_round(f.intercept);
    l["r_squared"] = stable_round(f.r_squared);
    l["rmse"] = stable_round(f.rmse);
    l["p_value"] = stable_round(f.p_value);
    l["stars"] = significance_stars(f.p_value);
    l["degenerate"] = f.degenerate;
    l["x_min"] = stable_round(lo);
    l["x_max"] = stable_round(hi);
    lines.push_back(l);
  }
  ordered_json j = ordered_json::object();
  j["points"] = points;
  j["fits"] = lines;
  return j;
}

// ---------------------------------------------------------------------------
// SVG

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return format_fixed(v, 2); }

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {}

  void text(double x, double y, std::string_view s, std::string_view anchor = "start",
            int size = 12, std::string_view extra = "") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
             std::to_string(size) + "\" text-anchor=\"" + std::string(anchor) + "\"" +
             (extra.empty() ? "" : " " + std::string(extra)) + ">" + escape(s) + "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            double width = 1.0, std::string_view extra = "") {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
             num(y2) + "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) +
             "\"" + (extra.empty() ? "" : " " + std::string(extra)) + "/>\n";
  }
  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view stroke = "none") {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(std::max(w, 0.0)) +
             "\" height=\"" + num(std::max(h, 0.0)) + "\" fill=\"" + std::string(fill) +
             "\" stroke=\"" + std::string(stroke) + "\"/>\n";
  }
  void circle(double cx, double cy, double r, std::string_view fill) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
             "\" fill=\"" + std::string(fill) + "\"/>\n";
  }
  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w_) + "\" height=\"" +
           num(h_) + "\" viewBox=\"0 0 " + num(w_) + " " + num(h_) +
           "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
  }

 private:
  double w_, h_;
  std::string body_;
};

struct Axis {
  double lo, hi, px_lo, px_hi;
  double operator()(double v) const {
    if (hi == lo) return (px_lo + px_hi) / 2.0;
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

void y_ticks(Svg& svg, const Axis& y, double x_left, double x_right) {
  for (int i = 0; i <= 4; ++i) {
    const double v = y.lo + (y.hi - y.lo) * i / 4.0;
    svg.line(x_left, y(v), x_right, y(v), "#dddddd");
    svg.text(x_left - 6, y(v) + 4, format_fixed(v, 2), "end", 10);
  }
}

std::string svg_waterfall(const json& sc) {
  const auto& rows = sc.at("hypotheses");
  const double row_h = 28.0, left = 330.0, width = 900.0, top = 60.0;
  const double height = top + row_h * static_cast<double>(rows.size()) + 60.0;
  Svg svg(width, height);
  svg.text(width / 2, 28, sc.value("title", ""), "middle", 16);
  const Axis x{-1.0, 1.0, left, width - 30.0};
  for (double v : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    svg.line(x(v), top - 10, x(v), height - 50, v == 0.0 ? "#333333" : "#dddddd");
    svg.text(x(v), height - 34, format_fixed(v, 1), "middle", 10);
  }
  double y = top;
  for (const auto& r : rows) {
    const double res = r.at("resonance_fraction").get<double>();
    const double con = r.at("conflict_fraction").get<double>();
    const std::string tag = r.at("polarity").get<std::string>() == "traditional" ? "(T) " : "(S) ";
    svg.text(left - 8, y + row_h / 2 + 4,
             std::to_string(r.at("index").get<int>()) + ". " + tag + r.at("dimension_id").get<std::string>(),
             "end", 11);
    svg.rect(x(0.0), y + 4, x(res) - x(0.0), row_h - 8, "#2ca02c");
    svg.rect(x(-con), y + 4, x(0.0) - x(-con), row_h - 8, "#d62728");
    y += row_h;
  }
  svg.text((left + width - 30) / 2, height - 12,
           sc.value("x_label", "proportion conflicting (-) / resonating (+)"), "middle", 12);
  return svg.str();
}

std::string svg_boxpanel(const json& sc) {
  const auto& boxes = sc.at("boxes");
  std::vector<std::string> groups, series;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& b : boxes) {
    const auto g = b.at("group").get<std::string>();
    const auto s = b.at("series").get<std::string>();
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
    if (std::find(series.begin(), series.end(), s) == series.end()) series.push_back(s);
    const auto& st = b.at("stats");
    const double wl = st.at("whisker_low").get<double>();
    const double wh = st.at("whisker_high").get<double>();
    lo = any ? std::min(lo, wl) : wl;
    hi = any ? std::max(hi, wh) : wh;
    any = true;
  }
  if (!any) {
    lo = -1.0;
    hi = 1.0;
  }
  const double pad = std::max(0.1, 0.05 * (hi - lo));
  lo -= pad;
  hi += pad;
  const double left = 70.0, top = 50.0, group_w = 90.0;
  const double width = left + 30.0 + group_w * static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  const double height = 420.0;
  Svg svg(width, height);
  svg.text(width / 2, 26, sc.value("title", ""), "middle", 16);
  const Axis y{lo, hi, height - 70.0, top};
  y_ticks(svg, y, left, width - 30.0);
  if (lo < 0.0 && hi > 0.0) svg.line(left, y(0.0), width - 30.0, y(0.0), "#333333", 1.0, "stroke-dasharray=\"4 3\"");
  const double box_w = (group_w - 20.0) / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (const auto& b : boxes) {
    const auto gi = static_cast<double>(std::find(groups.begin(), groups.end(), b.at("group").get<std::string>()) - groups.begin());
    const auto si = static_cast<std::size_t>(std::find(series.begin(), series.end(), b.at("series").get<std::string>()) - series.begin());
    const auto& st = b.at("stats");
    const double x0 = left + gi * group_w + 10.0 + static_cast<double>(si) * box_w;
    const double cx = x0 + box_w / 2;
    const char* color = kPalette[si % std::size(kPalette)];
    svg.line(cx, y(st.at("whisker_low").get<double>()), cx, y(st.at("whisker_high").get<double>()), "#333333");
    const double q1 = y(st.at("q1").get<double>()), q3 = y(st.at("q3").get<double>());
    svg.rect(x0 + 2, q3, box_w - 4, q1 - q3, color, "#333333");
    svg.line(x0 + 2, y(st.at("median").get<double>()), x0 + box_w - 2, y(st.at("median").get<double>()), "#000000", 2.0);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    svg.text(left + static_cast<double>(g) * group_w + group_w / 2, height - 50, groups[g], "middle", 10);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double lx = left + static_cast<double>(s) * 150.0;
    svg.rect(lx, height - 30, 12, 12, kPalette[s % std::size(kPalette)]);
    svg.text(lx + 16, height - 20, series[s], "start", 11);
  }
  svg.text(16, (top + height - 70) / 2, sc.value("y_label", "traditional (-) / secular (+)"), "middle", 11,
           "transform=\"rotate(-90 16 " + num((top + height - 70) / 2) + ")\"");
  return svg.str();
}

std::string svg_scatter(const json& sc) {
  const auto& points = sc.at("points");
  const auto& fits = sc.at("fits");
  double xlo = -1, xhi = 1, ylo = -1, yhi = 1;
  bool any = false;
  for (const auto& p : points) {
    const double px = p.at("x").get<double>(), py = p.at("y").get<double>();
    if (!any) {
      xlo = xhi = px;
      ylo = yhi = py;
      any = true;
    }
    xlo = std::min(xlo, px);
    xhi = std::max(xhi, px);
    ylo = std::min(ylo, py);
    yhi = std::max(yhi, py);
  }
  const double xp = std::max(0.1, 0.05 * (xhi - xlo)), yp = std::max(0.1, 0.05 * (yhi - ylo));
  const double width = 820.0, height = 560.0, left = 70.0, right = 200.0, top = 50.0, bottom = 60.0;
  Svg svg(width, height);
  svg.text((width - right) / 2, 26, sc.value("title", ""), "middle", 16);
  const Axis x{xlo - xp, xhi + xp, left, width - right};
  const Axis y{ylo - yp, yhi + yp, height - bottom, top};
  y_ticks(svg, y, left, width - right);
  for (int i = 0; i <= 4; ++i) {
    const double v = x.lo + (x.hi - x.lo) * i / 4.0;
    svg.text(x(v), height - bottom + 16, format_fixed(v, 2), "middle", 10);
  }
  std::vector<std::string> nations;
  for (const auto& f : fits) nations.push_back(f.at("nation").get<std::string>());
  for (const auto& p : points) {
    const auto nat = p.at("nation").get<std::string>();
    if (std::find(nations.begin(), nations.end(), nat) == nations.end()) nations.push_back(nat);
  }
  auto color = [&](const std::string& nat) {
    const auto i = static_cast<std::size_t>(std::find(nations.begin(), nations.end(), nat) - nations.begin());
    return kPalette[i % std::size(kPalette)];
  };
  for (const auto& p : points) {
    svg.circle(x(p.at("x").get<double>()), y(p.at("y").get<double>()), 3.5, color(p.at("nation").get<std::string>()));
  }
  double ly = top;
  for (const auto& f : fits) {
    const auto nat = f.at("nation").get<std::string>();
    if (!f.at("degenerate").get<bool>()) {
      const double a = f.at("x_min").get<double>(), b = f.at("x_max").get<double>();
      const double s = f.at("slope").get<double>(), c = f.at("intercept").get<double>();
      svg.line(x(a), y(c + s * a), x(b), y(c + s * b), color(nat), 2.0);
    }
    svg.circle(width - right + 20, ly, 5, color(nat));
    svg.text(width - right + 30, ly + 4,
             nat + "  R2=" + format_fixed(f.at("r_squared").get<double>(), 2) + f.at("stars").get<std::string>(),
             "start", 11);
    ly += 18;
  }
  svg.text((left + width - right) / 2, height - 16, sc.value("x_label", "LLM (RVR) group mean"), "middle", 12);
  svg.text(16, (top + height - bottom) / 2, sc.value("y_label", "WVS group mean"), "middle", 12,
           "transform=\"rotate(-90 16 " + num((top + height - bottom) / 2) + ")\"");
  return svg.str();
}

std::filesystem::path sidecar_path(const std::filesystem::path& svg) {
  auto p = svg;
  p.replace_extension(".json");
  return p;
}

}  // namespace

ordered_json build_sidecar(const FigureSpec& spec, const ValueBank& bank,
                           const AnalysisFilter& filter) {
  spec.validate();
  ordered_json data;
  switch (spec.kind) {
    case FigureKind::waterfall: data = waterfall_sidecar(spec, bank); break;
    case FigureKind::boxpanel: data = boxpanel_sidecar(spec, filter, bank); break;
    case FigureKind::scatter: data = scatter_sidecar(spec); break;
  }
  ordered_json j = ordered_json::object();
  j["kind"] = to_string(spec.kind);
  j["name"] = spec.name;
  j["title"] = spec.title;
  j["x_label"] = spec.x_label;
  j["y_label"] = spec.y_label;
  for (auto it = data.begin(); it != data.end(); ++it) j[it.key()] = it.value();
  return j;
}

std::string render_svg(const json& sidecar) {
  const auto kind = parse_figure_kind(sidecar.at("kind").get<std::string>());
  switch (kind) {
    case FigureKind::waterfall: return svg_waterfall(sidecar);
    case FigureKind::boxpanel: return svg_boxpanel(sidecar);
    case FigureKind::scatter: return svg_scatter(sidecar);
  }
  return {};
}

RenderResult render(const FigureSpec& spec, const ValueBank& bank, const AnalysisFilter& filter) {
  RenderResult result;
  result.svg = spec.output;
  result.sidecar = sidecar_path(spec.output);
  const auto sidecar = build_sidecar(spec, bank, filter);
  const std::string text = sidecar.dump(2) + "\n";
  try {
    write_text_file(result.sidecar, text);
  } catch (const Error& e) {
    throw ReportError(std::string("cannot write sidecar: ") + e.what());
  }
  try {
    // Draw from the serialized sidecar so the image depends on nothing else.
    write_text_file(result.svg, render_svg(json::parse(text)));
    result.image_written = true;
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

std::vector<FigureSpec> load_manifest(const std::filesystem::path& manifest,
                                      const std::filesystem::path& run_dir) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(manifest.string());
  } catch (const YAML::Exception& e) {
    throw ReportError(manifest.string() + ": " + e.what());
  }
  const auto figures = root["figures"];
  if (!figures || !figures.IsSequence()) throw ReportError(manifest.string() + ": 'figures' must be a list");
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : run_dir / path;
  };
  std::vector<FigureSpec> out;
  std::set<std::string> names;
  for (const auto& f : figures) {
    const auto where = manifest.string() + ":" + std::to_string(f.Mark().line + 1);
    try {
      FigureSpec spec;
      spec.name = f["name"].as<std::string>();
      if (!names.insert(spec.name).second) throw ReportError(where + ": duplicate figure name '" + spec.name + "'");
      spec.kind = parse_figure_kind(f["kind"].as<std::string>());
      if (const auto inputs = f["inputs"]) {
        for (const auto& kv : inputs) spec.inputs[kv.first.as<std::string>()] = resolve(kv.second.as<std::string>());
      }
      spec.output = f["output"] ? resolve(f["output"].as<std::string>())
                                : run_dir / "figures" / (spec.name + ".svg");
      spec.title = f["title"] ? f["title"].as<std::string>() : spec.name;
      if (f["x_label"]) spec.x_label = f["x_label"].as<std::string>();
      if (f["y_label"]) spec.y_label = f["y_label"].as<std::string>();
      if (f["slice"]) spec.slice = parse_slice(f["slice"].as<std::string>());
      if (f["series"]) spec.series = f["series"].as<std::string>();
      out.push_back(std::move(spec));
    } catch (const YAML::Exception& e) {
      throw ReportError(where + ": " + e.what());
    } catch (const ReportError&) {
      throw;
    } catch (const Error& e) {
      throw ReportError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<FigureSpec> default_manifest(const std::filesystem::path& run_dir, bool with_wvs) {
  const auto fig = run_dir / "figures";
  std::vector<FigureSpec> out;
  out.push_back({"waterfall", FigureKind::waterfall, {{"scores", run_dir / "scores.jsonl"}},
                 fig / "waterfall.svg", "Non-neutral share per hypothesis",
                 "proportion conflicting (-) / resonating (+)", "hypothesis", Slice::nation, "source"});
  for (auto slice : {Slice::nation, Slice::age, Slice::sex}) {
    const std::string s(to_string(slice));
    FigureSpec box{"box_" + s, FigureKind::boxpanel, {{"projections", run_dir / "projections.jsonl"}},
                   fig / ("box_" + s + ".svg"), "LLM vs WVS by " + s, s,
                   "traditional (-) / secular (+)", slice, "source"};
    if (with_wvs) box.inputs["wvs"] = run_dir / "wvs_respondents.jsonl";
    out.push_back(std::move(box));
  }
  if (with_wvs) {
    out.push_back({"scatter", FigureKind::scatter,
                   {{"group_means", run_dir / "group_means.csv"},
                    {"regression", run_dir / "regression_nation.csv"}},
                   fig / "scatter.svg", "Group means by nation with per-nation fits",
                   "LLM (RVR) group mean", "WVS group mean", Slice::nation, "source"});
  }
  for (auto slice : {Slice::nation, Slice::age, Slice::sex}) {
    const std::string s(to_string(slice));
    out.push_back({"ablation_" + s, FigureKind::boxpanel,
                   {{"projections", run_dir / "projections.jsonl"}},
                   fig / ("ablation_" + s + ".svg"), "Projection mode comparison by " + s, s,
                   "traditional (-) / secular (+)", slice, "mode"});
  }
  return out;
}

std::vector<RenderResult> render_manifest(const std::vector<FigureSpec>& specs,
                                          const std::filesystem::path& run_dir,
                                          const ValueBank& bank, const AnalysisFilter& filter) {
  std::vector<RenderResult> results;
  ordered_json index = ordered_json::array();
  for (const auto& spec : specs) {
    auto r = render(spec, bank, filter);
    ordered_json entry = ordered_json::object();
    entry["name"] = spec.name;
    entry["kind"] = to_string(spec.kind);
    entry["svg"] = std::filesystem::relative(r.svg, run_dir).generic_string();
    entry["sidecar"] = std::filesystem::relative(r.sidecar, run_dir).generic_string();
    entry["image_written"] = r.image_written;
    if (!r.error.empty()) entry["error"] = r.error;
    index.push_back(entry);
    results.push_back(std::move(r));
  }
  write_text_file(run_dir / "figures" / "index.json", index.dump(2) + "\n");
  return results;
}

}  // namespace valuelens
