#include "cli/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "decompad/evaluation.hpp"

namespace decompad::cli {

namespace {

constexpr double kWidth = 960.0;
constexpr double kPanelHeight = 170.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kTitleHeight = 22.0;
constexpr double kPlotHeight = kPanelHeight - kTitleHeight - 14.0;

struct Scale {
  double lo = 0.0, hi = 1.0;
  std::size_t n = 1;

  double x(std::size_t t) const {
    const double span = n > 1 ? static_cast<double>(n - 1) : 1.0;
    return kMarginLeft + (kWidth - kMarginLeft - kMarginRight) * static_cast<double>(t) / span;
  }
  double y(double v) const { return kTitleHeight + kPlotHeight * (hi - v) / (hi - lo); }
};

Scale scale_for(const std::vector<double>& values, double extra = NAN) {
  Scale s;
  s.n = std::max<std::size_t>(values.size(), 1);
  if (!values.empty()) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.lo = *lo;
    s.hi = *hi;
  }
  if (std::isfinite(extra)) {
    s.lo = std::min(s.lo, extra);
    s.hi = std::max(s.hi, extra);
  }
  if (!(s.hi > s.lo)) {
    s.lo -= 0.5;
    s.hi += 0.5;
  }
  const double pad = 0.05 * (s.hi - s.lo);
  s.lo -= pad;
  s.hi += pad;
  return s;
}

std::string polyline(const std::vector<double>& values, const Scale& s) {
  std::string points;
  points.reserve(values.size() * 14);
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (t > 0) points += ' ';
    fmt::format_to(std::back_inserter(points), "{:.1f},{:.2f}", s.x(t), s.y(values[t]));
  }
  return fmt::format("    <polyline class=\"line\" points=\"{}\"/>\n", points);
}

std::string panel(const std::string& id, const std::string& label, double top, const std::vector<double>& values,
                  const std::vector<bool>& shade, double threshold) {
  const Scale s = scale_for(values, threshold);
  std::string out = fmt::format("  <g class=\"panel\" id=\"{}\" transform=\"translate(0,{:.1f})\">\n", id, top);
  out += fmt::format("    <text class=\"title\" x=\"{:.1f}\" y=\"15\">{}</text>\n", kMarginLeft, xml_escape(label));
  out += fmt::format("    <rect class=\"frame\" x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\"/>\n",
                     kMarginLeft, kTitleHeight, kWidth - kMarginLeft - kMarginRight, kPlotHeight);
  for (const auto& seg : segments(shade)) {
    const double x0 = s.x(seg.first) - 0.5;
    const double x1 = s.x(seg.last) + 0.5;
    out += fmt::format("    <rect class=\"anomaly\" x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\"/>\n",
                       x0, kTitleHeight, std::max(x1 - x0, 1.0), kPlotHeight);
  }
  out += fmt::format("    <text class=\"tick\" x=\"{:.1f}\" y=\"{:.1f}\">{:.3g}</text>\n", kMarginLeft - 4.0,
                     kTitleHeight + 10.0, s.hi);
  out += fmt::format("    <text class=\"tick\" x=\"{:.1f}\" y=\"{:.1f}\">{:.3g}</text>\n", kMarginLeft - 4.0,
                     kTitleHeight + kPlotHeight, s.lo);
  out += polyline(values, s);
  if (std::isfinite(threshold)) {
    out += fmt::format("    <line class=\"threshold\" x1=\"{:.1f}\" x2=\"{:.1f}\" y1=\"{:.2f}\" y2=\"{:.2f}\"/>\n",
                       kMarginLeft, kWidth - kMarginRight, s.y(threshold), s.y(threshold));
  }
  out += "  </g>\n";
  return out;
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string render_series_svg(const SeriesPanels& s) {
  const double height = 4.0 * kPanelHeight + 30.0;
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\">\n",
      kWidth, height);
  out +=
      "  <style>\n"
      "    .frame { fill: none; stroke: #999; stroke-width: 1; }\n"
      "    .line { fill: none; stroke: #1f4e8c; stroke-width: 1; }\n"
      "    .anomaly { fill: #e4572e; fill-opacity: 0.25; stroke: none; }\n"
      "    .threshold { stroke: #e4572e; stroke-width: 1.2; stroke-dasharray: 6 3; }\n"
      "    .title { font: 13px sans-serif; fill: #222; }\n"
      "    .tick { font: 10px sans-serif; fill: #555; text-anchor: end; }\n"
      "  </style>\n";
  out += fmt::format("  <text class=\"title\" x=\"{:.1f}\" y=\"18\">{}</text>\n", kMarginLeft, xml_escape(s.title));
  const double top = 26.0;
  out += panel("raw", "raw series (shaded: labeled anomalies)", top, s.raw, s.truth, NAN);
  out += panel("seasonal", "seasonal", top + kPanelHeight, s.seasonal, {}, NAN);
  out += panel("trend", "trend", top + 2 * kPanelHeight, s.trend, {}, NAN);
  out += panel("error", "reconstruction error (dashed: threshold)", top + 3 * kPanelHeight, s.error, {},
               s.threshold);
  out += "</svg>\n";
  return out;
}

std::string render_index_html(const std::string& title, const std::vector<IndexEntry>& entries,
                              const std::string& metrics_table, const std::string& calibration) {
  std::string out = "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  out += fmt::format("<title>{}</title>\n", xml_escape(title));
  out += "<style>body { font-family: sans-serif; margin: 2em; } pre { background: #f4f4f4; padding: 1em; }</style>\n";
  out += "</head>\n<body>\n";
  out += fmt::format("<h1>{}</h1>\n", xml_escape(title));
  out += "<h2>Metrics</h2>\n";
  out += metrics_table.empty() ? "<p>No labels were given to detect; metrics are unavailable.</p>\n"
                               : fmt::format("<pre>{}</pre>\n", xml_escape(metrics_table));
  out += fmt::format("<h2>Threshold calibration</h2>\n<pre>{}</pre>\n", xml_escape(calibration));
  out += "<h2>Series</h2>\n";
  for (const auto& e : entries) {
    out += fmt::format("<h3>{}</h3>\n<img src=\"{}\" alt=\"{}\">\n", xml_escape(e.title), xml_escape(e.svg_file),
                       xml_escape(e.title));
  }
  out += "</body>\n</html>\n";
  return out;
}

}  // namespace decompad::cli
