#include "scbm/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "scbm/io.hpp"

namespace scbm {

namespace {

constexpr double kLeft = 80, kTop = 50, kPlot = 400, kBarGap = 30, kBarWidth = 20;
constexpr int kBarSteps = 64;
const char* const kGrey = "#bdbdbd";

struct Rgb {
  double r, g, b;
};

Rgb lerp(Rgb a, Rgb b, double t) { return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t}; }

std::string hex(Rgb c) {
  char buf[8];
  const auto q = [](double x) { return static_cast<int>(std::lround(std::clamp(x, 0.0, 255.0))); };
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", q(c.r), q(c.g), q(c.b));
  return buf;
}

std::string fx(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

bool diverging(PlotMetric m) { return m == PlotMetric::Alpha || m == PlotMetric::LogEvidenceDiff; }

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

double field_value(const std::string& s) { return s.empty() ? NAN : parse_double(s); }

}  // namespace

std::string to_string(PlotMetric m) {
  switch (m) {
    case PlotMetric::OmegaCross: return "omega_cross";
    case PlotMetric::OmegaP1: return "omega_p1";
    case PlotMetric::OmegaP2: return "omega_p2";
    case PlotMetric::Alpha: return "alpha";
    case PlotMetric::LogEvidenceDiff: return "log_evidence_diff";
    case PlotMetric::DegreeVariance: return "degree_variance";
    case PlotMetric::JsDistance: return "js_distance";
  }
  return "omega_cross";
}

PlotMetric parse_plot_metric(const std::string& s) {
  for (auto m : {PlotMetric::OmegaCross, PlotMetric::OmegaP1, PlotMetric::OmegaP2, PlotMetric::Alpha,
                 PlotMetric::LogEvidenceDiff, PlotMetric::DegreeVariance, PlotMetric::JsDistance})
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown plot metric '" + s + "'");
}

std::string heatmap_color(PlotMetric metric, double t) {
  t = std::clamp(t, 0.0, 1.0);
  if (diverging(metric)) {
    const Rgb red{178, 24, 43}, white{247, 247, 247}, blue{33, 102, 172};
    return hex(t < 0.5 ? lerp(red, white, t / 0.5) : lerp(white, blue, (t - 0.5) / 0.5));
  }
  return hex(lerp({255, 255, 255}, {8, 48, 107}, t));
}

HeatmapGrid heatmap_grid(const CsvTable& summary, const PlotSpec& spec) {
  const std::size_t lam = summary.column("lambda"), mu = summary.column("mu");
  const auto filter_col = [&](const std::optional<std::string>& want, const char* name) -> std::optional<std::size_t> {
    if (!want) return std::nullopt;
    return summary.column(name);
  };
  const auto fc = filter_col(spec.c, "c"), fg = filter_col(spec.generator, "generator"),
             fv = filter_col(spec.variant, "variant");
  std::vector<std::size_t> cols;
  switch (spec.metric) {
    case PlotMetric::OmegaCross: cols = {summary.column("mean_omega_cross")}; break;
    case PlotMetric::OmegaP1: cols = {summary.column("mean_omega_p1")}; break;
    case PlotMetric::OmegaP2: cols = {summary.column("mean_omega_p2")}; break;
    case PlotMetric::Alpha: cols = {summary.column("alpha_" + format_double(spec.omega_t))}; break;
    case PlotMetric::LogEvidenceDiff:
      cols = {summary.column("log_evidence_dc"), summary.column("log_evidence_ndc")};
      break;
    case PlotMetric::DegreeVariance: cols = {summary.column("degree_variance")}; break;
    case PlotMetric::JsDistance: cols = {summary.column("js_distance")}; break;
  }
  std::map<std::pair<double, double>, double> cells;
  std::set<double> lambdas, mus;
  for (const auto& row : summary.rows) {
    if ((fc && row[*fc] != format_double(parse_double(*spec.c)) && row[*fc] != *spec.c) ||
        (fg && row[*fg] != *spec.generator) || (fv && row[*fv] != *spec.variant))
      continue;
    const double l = parse_double(row[lam]), m = parse_double(row[mu]);
    double v = field_value(row[cols[0]]);
    if (cols.size() == 2) v -= field_value(row[cols[1]]);
    if (!cells.emplace(std::make_pair(l, m), v).second)
      throw InvalidArgument("several rows for cell (lambda=" + format_double(l) + ", mu=" + format_double(m) +
                            "); filter by c, generator or variant");
    lambdas.insert(l);
    mus.insert(m);
  }
  if (cells.empty()) throw InvalidArgument("no summary rows match the plot filters");
  HeatmapGrid g{{lambdas.begin(), lambdas.end()}, {mus.begin(), mus.end()}, {}};
  if (cells.size() != g.lambdas.size() * g.mus.size())
    throw InvalidArgument("summary rows do not form a rectangular grid (" + std::to_string(cells.size()) +
                          " cells for " + std::to_string(g.lambdas.size()) + " lambda by " +
                          std::to_string(g.mus.size()) + " mu values)");
  g.values.resize(static_cast<Eigen::Index>(g.mus.size()), static_cast<Eigen::Index>(g.lambdas.size()));
  for (std::size_t j = 0; j < g.mus.size(); ++j)
    for (std::size_t i = 0; i < g.lambdas.size(); ++i)
      g.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = cells.at({g.lambdas[i], g.mus[j]});
  return g;
}

std::string render_heatmap_svg(const HeatmapGrid& grid, const PlotSpec& spec) {
  const auto nl = static_cast<Eigen::Index>(grid.lambdas.size()), nm = static_cast<Eigen::Index>(grid.mus.size());
  if (nl == 0 || nm == 0 || grid.values.rows() != nm || grid.values.cols() != nl)
    throw InvalidArgument("heatmap grid is empty or inconsistent");

  double lo = INFINITY, hi = -INFINITY;
  for (Eigen::Index j = 0; j < nm; ++j)
    for (Eigen::Index i = 0; i < nl; ++i)
      if (std::isfinite(grid.values(j, i))) {
        lo = std::min(lo, grid.values(j, i));
        hi = std::max(hi, grid.values(j, i));
      }
  if (spec.metric == PlotMetric::Alpha) {
    lo = 0;
    hi = 1;
  } else if (spec.metric == PlotMetric::LogEvidenceDiff) {
    const double m = std::isfinite(lo) ? std::max(std::abs(lo), std::abs(hi)) : 1.0;
    lo = -m;
    hi = m;
  } else if (!std::isfinite(lo)) {
    lo = 0;
    hi = 1;
  }
  const auto scale = [&](double v) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; };

  const double cw = kPlot / double(nl), ch = kPlot / double(nm);
  const double width = kLeft + kPlot + kBarGap + kBarWidth + 70, height = kTop + kPlot + 60;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fx(width) + "\" height=\"" + fx(height) +
       "\" viewBox=\"0 0 " + fx(width) + " " + fx(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  std::string title = spec.title.empty() ? to_string(spec.metric) : spec.title;
  if (spec.title.empty() && spec.metric == PlotMetric::Alpha) title += " (omega_T = " + format_double(spec.omega_t) + ")";
  s += "<text x=\"" + fx(kLeft + kPlot / 2) + "\" y=\"" + fx(kTop - 20) + "\" text-anchor=\"middle\" font-size=\"14\">" +
       xml_escape(title) + "</text>\n";

  s += "<g id=\"cells\" shape-rendering=\"crispEdges\">\n";
  for (Eigen::Index j = 0; j < nm; ++j) {
    for (Eigen::Index i = 0; i < nl; ++i) {
      const double v = grid.values(j, i);
      const std::string fill = std::isfinite(v) ? heatmap_color(spec.metric, scale(v)) : kGrey;
      s += "<rect x=\"" + fx(kLeft + double(i) * cw) + "\" y=\"" + fx(kTop + double(nm - 1 - j) * ch) +
           "\" width=\"" + fx(cw) + "\" height=\"" + fx(ch) + "\" fill=\"" + fill + "\"><title>lambda=" +
           format_double(grid.lambdas[static_cast<std::size_t>(i)]) +
           " mu=" + format_double(grid.mus[static_cast<std::size_t>(j)]) + " value=" +
           (std::isfinite(v) ? format_double(v) : std::string("undefined")) + "</title></rect>\n";
    }
  }
  s += "</g>\n";
  s += "<rect x=\"" + fx(kLeft) + "\" y=\"" + fx(kTop) + "\" width=\"" + fx(kPlot) + "\" height=\"" + fx(kPlot) +
       "\" fill=\"none\" stroke=\"#000000\"/>\n";

  const auto stride = [](Eigen::Index n) { return std::max<Eigen::Index>(1, (n + 9) / 10); };
  for (Eigen::Index i = 0; i < nl; i += stride(nl))
    s += "<text x=\"" + fx(kLeft + (double(i) + 0.5) * cw) + "\" y=\"" + fx(kTop + kPlot + 15) +
         "\" text-anchor=\"middle\">" + label(grid.lambdas[static_cast<std::size_t>(i)]) + "</text>\n";
  for (Eigen::Index j = 0; j < nm; j += stride(nm))
    s += "<text x=\"" + fx(kLeft - 6) + "\" y=\"" + fx(kTop + (double(nm - 1 - j) + 0.5) * ch + 4) +
         "\" text-anchor=\"end\">" + label(grid.mus[static_cast<std::size_t>(j)]) + "</text>\n";
  s += "<text x=\"" + fx(kLeft + kPlot / 2) + "\" y=\"" + fx(kTop + kPlot + 35) +
       "\" text-anchor=\"middle\" font-size=\"13\">&#955;</text>\n";
  s += "<text x=\"" + fx(kLeft - 45) + "\" y=\"" + fx(kTop + kPlot / 2) +
       "\" text-anchor=\"middle\" font-size=\"13\">&#956;</text>\n";

  const double bx = kLeft + kPlot + kBarGap, step = kPlot / kBarSteps;
  s += "<g id=\"colorbar\" shape-rendering=\"crispEdges\">\n";
  for (int k = 0; k < kBarSteps; ++k) {
    const double t = (double(k) + 0.5) / kBarSteps;
    s += "<rect x=\"" + fx(bx) + "\" y=\"" + fx(kTop + kPlot - double(k + 1) * step) + "\" width=\"" +
         fx(kBarWidth) + "\" height=\"" + fx(step) + "\" fill=\"" + heatmap_color(spec.metric, t) + "\"/>\n";
  }
  s += "</g>\n";
  s += "<rect x=\"" + fx(bx) + "\" y=\"" + fx(kTop) + "\" width=\"" + fx(kBarWidth) + "\" height=\"" + fx(kPlot) +
       "\" fill=\"none\" stroke=\"#000000\"/>\n";
  const double mid = 0.5 * (lo + hi);
  const std::pair<double, double> ticks[] = {{hi, kTop}, {mid, kTop + kPlot / 2}, {lo, kTop + kPlot}};
  for (const auto& [v, y] : ticks)
    s += "<text class=\"bar-label\" x=\"" + fx(bx + kBarWidth + 5) + "\" y=\"" + fx(y + 4) + "\">" + label(v) +
         "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace scbm
