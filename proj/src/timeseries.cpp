#include "decompad/timeseries.hpp"

#include <string>

#include "decompad/io/csv.hpp"

namespace decompad {

TimeSeries::TimeSeries(std::size_t length, std::size_t channels)
    : length(length), channels(channels), values(length * channels, 0.0) {}

std::vector<double> TimeSeries::channel(std::size_t d) const {
  std::vector<double> out(length);
  for (std::size_t t = 0; t < length; ++t) out[t] = at(t, d);
  return out;
}

void TimeSeries::set_channel(std::size_t d, const std::vector<double>& series) {
  for (std::size_t t = 0; t < length; ++t) at(t, d) = series[t];
}

TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  std::vector<std::size_t> dims;
  int label_col = -1;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    const auto& name = table.header[i];
    if (name == "label") {
      label_col = static_cast<int>(i);
    } else if (name == "dim_" + std::to_string(dims.size())) {
      dims.push_back(i);
    } else {
      throw io::IoError(path.string() + ": unexpected column '" + name +
                        "' (expected dim_" + std::to_string(dims.size()) +
                        " or label)");
    }
  }
  if (dims.empty()) throw io::IoError(path.string() + ": no dim_ columns");
  if (table.rows.empty()) throw io::IoError(path.string() + ": no data rows");
  TimeSeries ts(table.rows.size(), dims.size());
  for (std::size_t t = 0; t < ts.length; ++t) {
    for (std::size_t d = 0; d < dims.size(); ++d) ts.at(t, d) = table.rows[t][dims[d]];
  }
  if (label_col >= 0) {
    ts.labels.resize(ts.length);
    for (std::size_t t = 0; t < ts.length; ++t) {
      ts.labels[t] = table.rows[t][label_col] != 0.0;
    }
  }
  return ts;
}

void write_timeseries_csv(const std::filesystem::path& path, const TimeSeries& series) {
  io::CsvTable table;
  for (std::size_t d = 0; d < series.channels; ++d) {
    table.header.push_back("dim_" + std::to_string(d));
  }
  if (series.has_labels()) table.header.push_back("label");
  table.rows.reserve(series.length);
  for (std::size_t t = 0; t < series.length; ++t) {
    std::vector<double> row;
    for (std::size_t d = 0; d < series.channels; ++d) row.push_back(series.at(t, d));
    if (series.has_labels()) row.push_back(series.labels[t] ? 1.0 : 0.0);
    table.rows.push_back(std::move(row));
  }
  io::write_csv(path, table);
}

std::vector<bool> read_labels_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  const int col = table.column("label");
  if (col < 0) throw io::IoError(path.string() + ": no label column");
  std::vector<bool> labels;
  for (const auto& row : table.rows) labels.push_back(row[col] != 0.0);
  return labels;
}

}  // namespace decompad
