#include "decompad/evaluation.hpp"

#include <fmt/format.h>

#include <stdexcept>

#include "decompad/io/csv.hpp"

namespace decompad {

namespace {

void require_same_length(const std::vector<bool>& pred, const std::vector<bool>& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("label length mismatch: " + std::to_string(pred.size()) + " predictions, " +
                                std::to_string(truth.size()) + " truth labels");
  }
}

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<Segment> segments(const std::vector<bool>& truth) {
  std::vector<Segment> out;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (!truth[t]) continue;
    std::size_t end = t;
    while (end + 1 < truth.size() && truth[end + 1]) ++end;
    out.push_back({t, end});
    t = end;
  }
  return out;
}

std::vector<bool> point_adjust(const std::vector<bool>& pred, const std::vector<bool>& truth) {
  require_same_length(pred, truth);
  std::vector<bool> out = pred;
  for (const auto& s : segments(truth)) {
    bool hit = false;
    for (std::size_t t = s.first; t <= s.last && !hit; ++t) hit = pred[t];
    if (hit) {
      for (std::size_t t = s.first; t <= s.last; ++t) out[t] = true;
    }
  }
  return out;
}

MetricsReport compute_metrics(const std::vector<bool>& pred, const std::vector<bool>& truth, bool adjusted) {
  require_same_length(pred, truth);
  const auto p = adjusted ? point_adjust(pred, truth) : pred;
  MetricsReport m;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p[t] && truth[t]) ++m.tp;
    else if (p[t]) ++m.fp;
    else if (truth[t]) ++m.fn;
    else ++m.tn;
  }
  m.precision = ratio(m.tp, m.tp + m.fp, m.precision_undefined);
  m.recall = ratio(m.tp, m.tp + m.fn, m.recall_undefined);
  m.f1_undefined = !(m.precision + m.recall > 0.0);
  m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

EvaluationSummary evaluate_entities(std::span<const std::string> names, std::span<const std::vector<bool>> preds,
                                    std::span<const std::vector<bool>> truths, bool adjusted) {
  if (names.size() != preds.size() || preds.size() != truths.size()) {
    throw std::invalid_argument("evaluate_entities: names, predictions and truths differ in count");
  }
  EvaluationSummary s;
  std::vector<bool> all_pred, all_truth;
  for (std::size_t i = 0; i < names.size(); ++i) {
    s.entities.push_back({names[i], compute_metrics(preds[i], truths[i], adjusted)});
    // Adjust per entity so segments never straddle two entities.
    const auto p = adjusted ? point_adjust(preds[i], truths[i]) : preds[i];
    all_pred.insert(all_pred.end(), p.begin(), p.end());
    all_truth.insert(all_truth.end(), truths[i].begin(), truths[i].end());
  }
  s.aggregate = compute_metrics(all_pred, all_truth, false);
  return s;
}

std::string metrics_csv(const EvaluationSummary& summary) {
  std::string out = "entity,tp,fp,tn,fn,precision,recall,f1\n";
  auto row = [&](const std::string& name, const MetricsReport& m) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", name, m.tp, m.fp, m.tn, m.fn, io::format_double(m.precision),
                       io::format_double(m.recall), io::format_double(m.f1));
  };
  for (const auto& e : summary.entities) row(e.entity, e.report);
  row("all", summary.aggregate);
  return out;
}

std::string metrics_table(const EvaluationSummary& summary) {
  std::string out = fmt::format("{:<24} {:>8} {:>8} {:>8} {:>8} {:>10} {:>10} {:>10}\n", "entity", "tp", "fp", "tn",
                                "fn", "precision", "recall", "f1");
  auto row = [&](const std::string& name, const MetricsReport& m) {
    out += fmt::format("{:<24} {:>8} {:>8} {:>8} {:>8} {:>10.4f} {:>10.4f} {:>10.4f}\n", name, m.tp, m.fp, m.tn,
                       m.fn, m.precision, m.recall, m.f1);
  };
  for (const auto& e : summary.entities) row(e.entity, e.report);
  row("all", summary.aggregate);
  return out;
}

}  // namespace decompad
