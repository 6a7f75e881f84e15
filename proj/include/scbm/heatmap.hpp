#pragma once

// SVG heatmaps of sweep summaries over the (lambda, mu) grid.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scbm/sweep.hpp"

namespace scbm {

enum class PlotMetric { OmegaCross, OmegaP1, OmegaP2, Alpha, LogEvidenceDiff, DegreeVariance, JsDistance };

std::string to_string(PlotMetric m);
/// omega_cross, omega_p1, omega_p2, alpha, log_evidence_diff, degree_variance, js_distance.
PlotMetric parse_plot_metric(const std::string& s);

struct PlotSpec {
  PlotMetric metric = PlotMetric::OmegaCross;
  /// Threshold whose alpha column is plotted.
  double omega_t = 0.75;
  /// Row filters; needed when the summary holds several values.
  std::optional<std::string> c;
  std::optional<std::string> generator;
  std::optional<std::string> variant;
  std::string title;
};

/// Cell values with lambda along columns and mu along rows, both ascending.
/// Missing values (undefined alpha, failed cells) are NaN.
struct HeatmapGrid {
  std::vector<double> lambdas;
  std::vector<double> mus;
  Eigen::MatrixXd values;
};

/// Throws InvalidArgument when the filtered rows do not cover a rectangular
/// grid exactly once per cell.
HeatmapGrid heatmap_grid(const CsvTable& summary, const PlotSpec& spec);

/// Diverging blue-white-red for alpha (domain [0, 1]) and the log-evidence
/// difference dc - ndc (domain symmetric about 0); white to dark blue
/// (#08306b) over the data range otherwise. Undefined cells are grey.
std::string render_heatmap_svg(const HeatmapGrid& grid, const PlotSpec& spec);

/// RGB hex of value t in [0, 1] on the metric's colour map.
std::string heatmap_color(PlotMetric metric, double t);

}  // namespace scbm
