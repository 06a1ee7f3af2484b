#include "decompad/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

namespace decompad {

namespace {

constexpr int kGammaMinMilli = -500;
constexpr int kGammaMaxMilli = 1000;
constexpr double kGammaZero = 1e-6;

}  // namespace

void PotParams::validate() const {
  if (!(init_quantile > 0.0 && init_quantile < 1.0)) {
    throw std::invalid_argument("init_quantile: must lie in (0, 1)");
  }
  if (!(risk > 0.0 && risk < 1.0)) throw std::invalid_argument("risk: must lie in (0, 1)");
  if (min_excesses < 1) throw std::invalid_argument("min_excesses: must be >= 1");
}

std::vector<double> score(std::span<const double> original, std::span<const double> reconstructed,
                          std::size_t channels) {
  if (channels == 0 || original.size() != reconstructed.size() || original.size() % channels != 0) {
    throw std::invalid_argument("score: original and reconstruction shapes differ");
  }
  std::vector<double> out(original.size() / channels);
  for (std::size_t t = 0; t < out.size(); ++t) {
    double ss = 0.0;
    for (std::size_t d = 0; d < channels; ++d) {
      const double r = original[t * channels + d] - reconstructed[t * channels + d];
      ss += r * r;
    }
    out[t] = std::sqrt(ss);
  }
  return out;
}

double empirical_quantile(std::span<const double> values, double p) {
  if (values.empty()) throw CalibrationError("quantile of an empty score series");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double gpd_log_likelihood(std::span<const double> y, double gamma, double sigma) {
  if (!(sigma > 0.0)) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(y.size());
  if (std::abs(gamma) < kGammaZero) {
    return -n * std::log(sigma) - std::accumulate(y.begin(), y.end(), 0.0) / sigma;
  }
  double acc = 0.0;
  for (double v : y) {
    const double z = 1.0 + gamma * v / sigma;
    if (!(z > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += std::log(z);
  }
  return -n * std::log(sigma) - (1.0 + 1.0 / gamma) * acc;
}

double gpd_profile_sigma(std::span<const double> y, double gamma, double warm_start) {
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  if (std::abs(gamma) < kGammaZero) return mean;
  const double ymax = *std::max_element(y.begin(), y.end());

  // h decreases strictly in sigma on the support, from +inf (or n/gamma) to -n.
  auto h = [&](double s, double* slope) {
    double a = 0.0, b = 0.0;
    for (double v : y) {
      const double inv = 1.0 / (s + gamma * v);
      a += v * inv;
      b += v * inv * inv;
    }
    if (slope != nullptr) *slope = -(1.0 + gamma) * b;
    return (1.0 + gamma) * a - n;
  };

  double lo = gamma < 0.0 ? -gamma * ymax : 0.0;
  double step = std::max(mean, 1e-300);
  double hi = lo + step;
  while (h(hi, nullptr) > 0.0) {
    lo = hi;
    step *= 2.0;
    hi = lo + step;
  }
  double s = (warm_start > lo && warm_start < hi) ? warm_start : 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double slope = 0.0;
    const double value = h(s, &slope);
    if (value == 0.0) return s;
    if (value > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    double next = s - value / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-14 * s || hi - lo <= 1e-15 * hi) return next;
    s = next;
  }
  return s;
}

GpdFit fit_gpd(std::span<const double> excesses, std::size_t total, int min_excesses) {
  if (excesses.size() < static_cast<std::size_t>(std::max(min_excesses, 1))) {
    throw CalibrationError("only " + std::to_string(excesses.size()) + " excesses over the initial threshold (need " +
                           std::to_string(min_excesses) + "); lower init_quantile");
  }
  if (*std::max_element(excesses.begin(), excesses.end()) <= 0.0) {
    throw CalibrationError("excesses have no spread; scores are degenerate");
  }
  GpdFit best;
  best.log_likelihood = -std::numeric_limits<double>::infinity();
  int best_milli = kGammaMinMilli;
  double warm = 0.0;
  for (int milli = kGammaMinMilli; milli <= kGammaMaxMilli; ++milli) {
    const double gamma = milli / 1000.0;
    const double sigma = gpd_profile_sigma(excesses, gamma, warm);
    warm = sigma;
    const double ll = gpd_log_likelihood(excesses, gamma, sigma);
    if (ll > best.log_likelihood) {
      best.log_likelihood = ll;
      best.gamma = gamma;
      best.sigma = sigma;
      best_milli = milli;
    }
  }
  if (!std::isfinite(best.log_likelihood)) throw CalibrationError("GPD likelihood is not finite on the grid");
  best.peaks = excesses.size();
  best.total = total;
  best.at_grid_bound = best_milli == kGammaMinMilli || best_milli == kGammaMaxMilli;
  if (best.at_grid_bound) {
    spdlog::warn("GPD shape estimate {} sits on the grid bound [-0.5, 1]", best.gamma);
  }
  return best;
}

double pot_quantile(double t0, const GpdFit& fit, double risk) {
  const double ratio = risk * static_cast<double>(fit.total) / static_cast<double>(fit.peaks);
  if (std::abs(fit.gamma) < kGammaZero) return t0 - fit.sigma * std::log(ratio);
  return t0 + fit.sigma / fit.gamma * (std::pow(ratio, -fit.gamma) - 1.0);
}

PotResult pot_threshold(std::span<const double> scores, const PotParams& params) {
  params.validate();
  PotResult r;
  r.initial_threshold = empirical_quantile(scores, params.init_quantile);
  std::vector<double> excesses;
  for (double s : scores) {
    if (s > r.initial_threshold) excesses.push_back(s - r.initial_threshold);
  }
  r.fit = fit_gpd(excesses, scores.size(), params.min_excesses);
  r.threshold = pot_quantile(r.initial_threshold, r.fit, params.risk);
  return r;
}

std::vector<bool> label_anomalies(std::span<const double> scores, double threshold) {
  std::vector<bool> out(scores.size());
  for (std::size_t t = 0; t < scores.size(); ++t) out[t] = scores[t] > threshold;
  return out;
}

}  // namespace decompad
