#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace decompad {

/// Inclusive [first, last] run of true labels.
struct Segment {
  std::size_t first = 0;
  std::size_t last = 0;
  bool operator==(const Segment&) const = default;
};

std::vector<Segment> segments(const std::vector<bool>& truth);

/// Marks a whole true segment of `truth` as predicted when any point of it
/// is predicted. Predictions outside truth segments are kept as they are.
std::vector<bool> point_adjust(const std::vector<bool>& pred, const std::vector<bool>& truth);

struct MetricsReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the corresponding denominator was zero and the metric fell back to 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

MetricsReport compute_metrics(const std::vector<bool>& pred, const std::vector<bool>& truth, bool adjusted);

/// Metrics per named entity plus an aggregate over their concatenation.
struct EntityMetrics {
  std::string entity;
  MetricsReport report;
};

struct EvaluationSummary {
  std::vector<EntityMetrics> entities;
  MetricsReport aggregate;
};

EvaluationSummary evaluate_entities(std::span<const std::string> names,
                                    std::span<const std::vector<bool>> preds,
                                    std::span<const std::vector<bool>> truths, bool adjusted);

/// CSV with columns entity,tp,fp,tn,fn,precision,recall,f1; the aggregate row
/// is named "all".
std::string metrics_csv(const EvaluationSummary& summary);
std::string metrics_table(const EvaluationSummary& summary);

}  // namespace decompad
