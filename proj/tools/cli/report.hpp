#pragma once

#include <string>
#include <vector>

namespace decompad::cli {

/// One channel of a detection run, ready to plot.
struct SeriesPanels {
  std::string title;
  std::vector<double> raw;
  std::vector<double> seasonal;
  std::vector<double> trend;
  std::vector<double> error;
  std::vector<bool> truth;  // empty when the run had no labels
  double threshold = 0.0;
};

/// Four stacked panels: raw series with shaded truth segments, seasonal,
/// trend, and reconstruction error with the threshold line.
std::string render_series_svg(const SeriesPanels& series);

struct IndexEntry {
  std::string svg_file;
  std::string title;
};

std::string render_index_html(const std::string& title, const std::vector<IndexEntry>& entries,
                              const std::string& metrics_table, const std::string& calibration);

std::string xml_escape(const std::string& text);

}  // namespace decompad::cli
