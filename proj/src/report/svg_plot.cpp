#include "esc/report/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "esc/error.hpp"

namespace esc::report {

namespace {

int method_rank(const std::string& m) {
  if (m == "ESC") return 0;
  if (m == "ESC_var") return 1;
  if (m == "FP") return 2;
  if (m == "AP") return 3;
  return 4;
}

const char* method_color(const std::string& m) {
  if (m == "ESC") return "#d62728";
  if (m == "ESC_var") return "#ff7f0e";
  if (m == "FP") return "#1f77b4";
  if (m == "AP") return "#2ca02c";
  return "#7f7f7f";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return out;
}

}  // namespace

std::vector<PlotGroup> group_runs(const std::vector<train::LoadedRun>& runs) {
  using Key = std::pair<int, std::string>;
  std::map<Key, std::map<std::string, std::vector<const train::LoadedRun*>>> grouped;
  for (const auto& r : runs) {
    if (r.metrics.failure || r.metrics.trace.empty()) continue;
    grouped[{r.metrics.benchmark_id, r.metrics.case_label}][r.metrics.method_label()].push_back(&r);
  }
  std::vector<PlotGroup> out;
  for (const auto& [key, by_method] : grouped) {
    PlotGroup g;
    g.benchmark_id = key.first;
    g.case_label = key.second;
    for (const auto& [method, members] : by_method) {
      const auto& ref = members.front()->metrics.trace;
      for (const auto* m : members) {
        const auto& t = m->metrics.trace;
        bool same = t.size() == ref.size();
        for (std::size_t i = 0; same && i < t.size(); ++i) same = t[i].iteration == ref[i].iteration;
        if (!same) {
          throw ConfigError("mismatched traces for b" + std::to_string(key.first) + " " + key.second +
                            " " + method + ": " + members.front()->source + " (" +
                            std::to_string(ref.size()) + " points) vs " + m->source + " (" +
                            std::to_string(t.size()) + " points)");
        }
      }
      CurveSeries s;
      s.method = method;
      s.runs = members.size();
      const double n = static_cast<double>(members.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        double mean = 0.0;
        for (const auto* m : members) mean += m->metrics.trace[i].test_rmse;
        mean /= n;
        s.iterations.push_back(static_cast<double>(ref[i].iteration));
        s.mean.push_back(mean);
        if (members.size() > 1) {
          double ss = 0.0;
          for (const auto* m : members) {
            const double d = m->metrics.trace[i].test_rmse - mean;
            ss += d * d;
          }
          s.half_width.push_back(1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n));
        }
      }
      g.series.push_back(std::move(s));
    }
    std::stable_sort(g.series.begin(), g.series.end(), [](const CurveSeries& a, const CurveSeries& b) {
      return method_rank(a.method) < method_rank(b.method);
    });
    out.push_back(std::move(g));
  }
  return out;
}

double PlotFrame::px(double x) const {
  return left + (x - x_min) / (x_max - x_min) * (width - left - right);
}

double PlotFrame::py(double y) const {
  return top + (y_max - y) / (y_max - y_min) * (height - top - bottom);
}

PlotFrame frame_for(const PlotGroup& group) {
  PlotFrame f;
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& s : group.series) {
    for (std::size_t i = 0; i < s.iterations.size(); ++i) {
      const double hw = s.half_width.empty() ? 0.0 : s.half_width[i];
      x_lo = std::min(x_lo, s.iterations[i]);
      x_hi = std::max(x_hi, s.iterations[i]);
      y_lo = std::min(y_lo, s.mean[i] - hw);
      y_hi = std::max(y_hi, s.mean[i] + hw);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) {
    const double pad = std::max(std::abs(y_lo) * 0.05, 0.5);
    y_lo -= pad;
    y_hi += pad;
  } else {
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }
  f.x_min = x_lo;
  f.x_max = x_hi;
  f.y_min = y_lo;
  f.y_max = y_hi;
  return f;
}

std::string render_svg(const PlotGroup& group, const std::string& metadata) {
  const PlotFrame f = frame_for(group);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(f.width) << "\" height=\""
      << num(f.height) << "\" viewBox=\"0 0 " << num(f.width) << ' ' << num(f.height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<metadata>" << xml_escape(metadata) << "</metadata>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(f.width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << "Benchmark " << group.benchmark_id << ", " << xml_escape(group.case_label) << "</text>\n";

  const double x0 = f.left, x1 = f.width - f.right;
  const double y0 = f.top, y1 = f.height - f.bottom;
  svg << "<g class=\"axes\" stroke=\"#333\" fill=\"none\">\n"
      << "<path d=\"M " << num(x0) << ' ' << num(y0) << " L " << num(x0) << ' ' << num(y1) << " L "
      << num(x1) << ' ' << num(y1) << "\"/>\n</g>\n";
  svg << "<g class=\"ticks\" fill=\"#333\">\n";
  for (double t : ticks(f.x_min, f.x_max)) {
    svg << "<text x=\"" << num(f.px(t)) << "\" y=\"" << num(y1 + 16)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(f.y_min, f.y_max)) {
    svg << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(f.py(t) + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(f.height - 12)
      << "\" text-anchor=\"middle\">iteration</text>\n";
  svg << "<text transform=\"translate(16 " << num((y0 + y1) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">test RMSE</text>\n";

  for (const auto& s : group.series) {
    if (s.half_width.empty() || s.iterations.empty()) continue;
    svg << "<path class=\"band\" data-method=\"" << xml_escape(s.method) << "\" fill=\""
        << method_color(s.method) << "\" fill-opacity=\"0.2\" stroke=\"none\" d=\"";
    for (std::size_t i = 0; i < s.iterations.size(); ++i) {
      svg << (i == 0 ? "M " : " L ") << num(f.px(s.iterations[i])) << ' '
          << num(f.py(s.mean[i] + s.half_width[i]));
    }
    for (std::size_t i = s.iterations.size(); i-- > 0;) {
      svg << " L " << num(f.px(s.iterations[i])) << ' ' << num(f.py(s.mean[i] - s.half_width[i]));
    }
    svg << " Z\"/>\n";
  }
  for (const auto& s : group.series) {
    if (s.iterations.empty()) continue;
    svg << "<path class=\"mean\" data-method=\"" << xml_escape(s.method) << "\" fill=\"none\" stroke=\""
        << method_color(s.method) << "\" stroke-width=\"1.8\" d=\"";
    for (std::size_t i = 0; i < s.iterations.size(); ++i) {
      svg << (i == 0 ? "M " : " L ") << num(f.px(s.iterations[i])) << ' ' << num(f.py(s.mean[i]));
    }
    svg << "\"/>\n";
  }

  svg << "<g class=\"legend\">\n";
  double ly = y0 + 10;
  for (const auto& s : group.series) {
    svg << "<path d=\"M " << num(x1 + 15) << ' ' << num(ly) << " L " << num(x1 + 40) << ' '
        << num(ly) << "\" stroke=\"" << method_color(s.method) << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(x1 + 46) << "\" y=\"" << num(ly + 4) << "\">" << xml_escape(s.method)
        << " (n=" << s.runs << ")</text>\n";
    ly += 20;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string plot_file_name(const PlotGroup& group) {
  return "b" + std::to_string(group.benchmark_id) + "_" + train::case_file_tag(group.case_label) +
         ".svg";
}

}  // namespace esc::report
