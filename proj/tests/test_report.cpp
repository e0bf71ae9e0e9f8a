#include <cmath>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "esc/error.hpp"
#include "esc/report/svg_plot.hpp"

using namespace esc;
using namespace esc::report;
using train::LoadedRun;

namespace {

LoadedRun run(const std::string& method, std::uint64_t seed, std::vector<double> rmse,
              std::size_t step = 50, const std::string& case_label = "M=4") {
  LoadedRun r;
  r.metrics.method = data::parse_method(method);
  r.metrics.case_label = case_label;
  r.metrics.trained_on = case_label;
  r.metrics.benchmark_id = 1;
  r.metrics.seed = seed;
  for (std::size_t i = 0; i < rmse.size(); ++i) r.metrics.trace.push_back({i * step, 1.0, rmse[i]});
  r.metrics.final_rmse = rmse.back();
  r.source = method + std::to_string(seed);
  return r;
}

// All (x, y) pairs of the path with the given class and method.
std::vector<std::pair<double, double>> path_points(const std::string& svg, const std::string& cls,
                                                   const std::string& method) {
  const std::regex path("<path class=\"" + cls + "\" data-method=\"" + method + "\"[^>]* d=\"([^\"]*)\"");
  std::smatch m;
  if (!std::regex_search(svg, m, path)) return {};
  std::istringstream in(m[1].str());
  std::vector<std::pair<double, double>> pts;
  std::string cmd;
  double x, y;
  while (in >> cmd >> x >> y) pts.emplace_back(x, y);
  return pts;
}

}  // namespace

TEST_CASE("single seed: mean line without a band") {
  const auto groups = group_runs({run("ESC", 1, {3, 2, 1})});
  REQUIRE(groups.size() == 1);
  REQUIRE(groups[0].series.size() == 1);
  CHECK(groups[0].series[0].half_width.empty());
  const auto svg = render_svg(groups[0], "meta");
  CHECK(path_points(svg, "mean", "ESC").size() == 3);
  CHECK(svg.find("class=\"band\"") == std::string::npos);
  CHECK(plot_file_name(groups[0]) == "b1_M4.svg");
}

TEST_CASE("identical runs give a zero-width band") {
  const auto groups = group_runs({run("FP", 1, {3, 2, 1}), run("FP", 2, {3, 2, 1})});
  REQUIRE(groups.size() == 1);
  const auto& s = groups[0].series[0];
  CHECK(s.runs == 2);
  for (double h : s.half_width) CHECK(h == 0.0);
}

TEST_CASE("band half-width is 1.96 sd / sqrt(n)") {
  const auto groups = group_runs({run("AP", 1, {1, 1}), run("AP", 2, {3, 3})});
  const auto& s = groups[0].series[0];
  CHECK(s.mean == std::vector<double>{2, 2});
  // sample sd of {1, 3} = sqrt(2)
  CHECK(s.half_width[0] == doctest::Approx(1.96 * std::sqrt(2.0) / std::sqrt(2.0)));
}

TEST_CASE("a constant trace renders as a horizontal line at py(value)") {
  const auto groups = group_runs({run("ESC", 1, {2.5, 2.5, 2.5, 2.5})});
  const auto frame = frame_for(groups[0]);
  CHECK(frame.y_min < 2.5);
  CHECK(frame.y_max > 2.5);
  const auto pts = path_points(render_svg(groups[0], ""), "mean", "ESC");
  REQUIRE(pts.size() == 4);
  for (const auto& [x, y] : pts) CHECK(std::abs(y - frame.py(2.5)) <= 0.005);
  CHECK(std::abs(pts.front().first - frame.px(0)) <= 0.005);
  CHECK(std::abs(pts.back().first - frame.px(150)) <= 0.005);
}

TEST_CASE("grouping orders methods and separates cases") {
  auto var = run("ESC", 1, {2, 1});
  var.metrics.trained_on = "M=1..6";
  const auto groups = group_runs({run("AP", 1, {4, 3}), run("FP", 1, {3, 2}), var, run("ESC", 1, {2, 1}),
                                  run("ESC", 1, {5, 4}, 50, "M=2")});
  REQUIRE(groups.size() == 2);
  const auto& g = groups[0].case_label == "M=4" ? groups[0] : groups[1];
  std::vector<std::string> order;
  for (const auto& s : g.series) order.push_back(s.method);
  CHECK(order == std::vector<std::string>{"ESC", "ESC_var", "FP", "AP"});
}

TEST_CASE("failed runs are skipped; mismatched grids are rejected") {
  auto failed = run("ESC", 2, {9});
  failed.metrics.failure = "diverged";
  const auto groups = group_runs({run("ESC", 1, {3, 2}), failed});
  CHECK(groups[0].series[0].runs == 1);
  CHECK_THROWS_AS(group_runs({run("ESC", 1, {3, 2}), run("ESC", 2, {3, 2}, 25)}), ConfigError);
}

TEST_CASE("metadata is XML-escaped") {
  const auto groups = group_runs({run("ESC", 1, {1, 2})});
  const auto svg = render_svg(groups[0], "a<b & \"c\"");
  CHECK(svg.find("a<b") == std::string::npos);
  CHECK(svg.find("a&lt;b &amp;") != std::string::npos);
}
