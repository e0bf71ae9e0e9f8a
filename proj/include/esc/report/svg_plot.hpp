#pragma once

#include <string>
#include <vector>

#include "esc/trainer/metrics_io.hpp"

namespace esc::report {

/// Mean test-RMSE curve of one method over its seeds, with the half-width of
/// the 95% normal interval (1.96 * std / sqrt(runs)) at each point. The
/// half-width vector is empty when only one run is available.
struct CurveSeries {
  std::string method;
  std::vector<double> iterations;
  std::vector<double> mean;
  std::vector<double> half_width;
  std::size_t runs = 0;
};

struct PlotGroup {
  int benchmark_id = 0;
  std::string case_label;
  std::vector<CurveSeries> series;  // ordered ESC, ESC_var, FP, AP, then others
};

/// Groups successful runs by (benchmark, case) and averages them per method.
/// Failed runs are skipped. Throws ConfigError when the runs of one method
/// disagree on their iteration grid, naming the offending sources.
std::vector<PlotGroup> group_runs(const std::vector<train::LoadedRun>& runs);

/// Pixel geometry shared by the renderer and anything that reads plots back.
struct PlotFrame {
  double width = 720.0;
  double height = 440.0;
  double left = 70.0;
  double right = 150.0;  // room for the legend
  double top = 40.0;
  double bottom = 50.0;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double px(double x) const;
  double py(double y) const;
};

/// Data ranges of a group with a small margin; a flat range is widened so the
/// frame is never degenerate.
PlotFrame frame_for(const PlotGroup& group);

/// Self-contained SVG: axes, one mean line per method (path class "mean",
/// attribute data-method) and, with more than one run, a shaded band (path
/// class "band"). `metadata` is embedded verbatim (XML-escaped).
std::string render_svg(const PlotGroup& group, const std::string& metadata);

/// "b1_M4.svg" style file name for a group.
std::string plot_file_name(const PlotGroup& group);

}  // namespace esc::report
