#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace decompad {

/// T x D real-valued series, row-major, with optional per-point labels.
struct TimeSeries {
  std::size_t length = 0;
  std::size_t channels = 0;
  std::vector<double> values;
  std::vector<bool> labels;  // empty when unlabeled

  TimeSeries() = default;
  TimeSeries(std::size_t length, std::size_t channels);

  double at(std::size_t t, std::size_t d) const { return values[t * channels + d]; }
  double& at(std::size_t t, std::size_t d) { return values[t * channels + d]; }
  bool has_labels() const { return !labels.empty(); }
  std::vector<double> channel(std::size_t d) const;
  void set_channel(std::size_t d, const std::vector<double>& series);
};

/// Target-data CSV: header dim_0,...,dim_{D-1}[,label], one row per timestamp.
TimeSeries read_timeseries_csv(const std::filesystem::path& path);
void write_timeseries_csv(const std::filesystem::path& path, const TimeSeries& series);

/// Labels from the `label` column of any CSV.
std::vector<bool> read_labels_csv(const std::filesystem::path& path);

}  // namespace decompad
