#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "decompad/numerics/tensor.hpp"

namespace decompad::numerics {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  /// Zeroed moments shaped like `params`.
  static AdamState for_params(std::span<const Tensor> params);
};

/// One bias-corrected ADAM update of every parameter, then clears grads.
/// Throws UsageError if a parameter has no gradient or the state does not
/// match the parameter list.
void adam_step(std::span<Tensor> params, AdamState& state, double lr);

}  // namespace decompad::numerics
