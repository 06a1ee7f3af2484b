#pragma once

// Central finite-difference oracle for tape gradients. Test-only: it only
// evaluates the forward function with no tape active.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "decompad/numerics/ops.hpp"
#include "decompad/numerics/tensor.hpp"

namespace decompad::testing {

using numerics::Tensor;

inline Tensor random_tensor(numerics::Shape shape, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0,
                            bool requires_grad = true) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> data(numerics::element_count(shape));
  for (auto& v : data) v = dist(rng);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

struct GradCheckResult {
  double max_relative_error = 0.0;
};

/// Compares tape gradients of `loss_fn(inputs)` against central differences
/// with step `h`. The relative error for one input is
/// ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-8).
inline GradCheckResult gradcheck(
    const std::function<Tensor(const std::vector<Tensor>&)>& loss_fn,
    std::vector<Tensor> inputs, double h = 1e-5) {
  for (auto& t : inputs) t.clear_grad();
  {
    numerics::Tape tape;
    auto active = tape.activate();
    Tensor loss = loss_fn(inputs);
    tape.backward(loss);
  }
  GradCheckResult result;
  for (auto& t : inputs) {
    if (!t.requires_grad()) continue;
    std::vector<double> analytic(t.size(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
    std::vector<double> numeric(t.size());
    auto values = t.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss_fn(inputs).item();
      values[i] = saved - h;
      const double down = loss_fn(inputs).item();
      values[i] = saved;
      numeric[i] = (up - down) / (2.0 * h);
    }
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn += numeric[i] * numeric[i];
    }
    const double denom = std::max({std::sqrt(na), std::sqrt(nn), 1e-8});
    result.max_relative_error =
        std::max(result.max_relative_error, std::sqrt(diff) / denom);
    t.clear_grad();
  }
  return result;
}

/// Projects a tensor-valued op to a scalar with fixed random weights so that
/// every output element contributes to the checked gradient.
inline Tensor project(const Tensor& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor w = random_tensor(y.shape(), rng, -1.0, 1.0, false);
  return numerics::sum(numerics::mul(y, w));
}

}  // namespace decompad::testing
