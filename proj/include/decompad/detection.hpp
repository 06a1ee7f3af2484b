#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace decompad {

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PotParams {
  double init_quantile = 0.98;
  double risk = 1e-3;  // q
  int min_excesses = 30;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct GpdFit {
  double gamma = 0.0;
  double sigma = 1.0;
  std::size_t peaks = 0;  // N_t
  std::size_t total = 0;  // n
  double log_likelihood = 0.0;
  bool at_grid_bound = false;
};

struct PotResult {
  double initial_threshold = 0.0;  // t0
  GpdFit fit;
  double threshold = 0.0;  // z_q
};

/// Per-timestamp L2 norm across channels of original - reconstructed. Both
/// are row-major T x D.
std::vector<double> score(std::span<const double> original, std::span<const double> reconstructed,
                          std::size_t channels);

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::span<const double> values, double p);

/// Generalized-Pareto maximum likelihood by grid search over
/// gamma in [-0.5, 1] (step 1e-3). At each gamma the scale solves the
/// profile score equation (1 + gamma) sum y / (sigma + gamma y) = n.
/// `total` is the number of scores the excesses were drawn from.
GpdFit fit_gpd(std::span<const double> excesses, std::size_t total, int min_excesses = 30);

/// Log-likelihood of GPD(gamma, sigma) for `excesses`; -inf outside the
/// support.
double gpd_log_likelihood(std::span<const double> excesses, double gamma, double sigma);

/// Profile-likelihood scale for a fixed shape.
double gpd_profile_sigma(std::span<const double> excesses, double gamma, double warm_start = 0.0);

/// z_q = t0 + sigma/gamma ((q n / N_t)^-gamma - 1), or its gamma -> 0 limit.
double pot_quantile(double t0, const GpdFit& fit, double risk);

PotResult pot_threshold(std::span<const double> scores, const PotParams& params);

std::vector<bool> label_anomalies(std::span<const double> scores, double threshold);

}  // namespace decompad
