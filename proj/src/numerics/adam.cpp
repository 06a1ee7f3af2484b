#include "decompad/numerics/adam.hpp"

#include <cmath>
#include <string>

namespace decompad::numerics {

AdamState AdamState::for_params(std::span<const Tensor> params) {
  AdamState state;
  for (const auto& p : params) {
    state.first_moment.emplace_back(p.size(), 0.0);
    state.second_moment.emplace_back(p.size(), 0.0);
  }
  return state;
}

void adam_step(std::span<Tensor> params, AdamState& state, double lr) {
  if (state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw UsageError("adam_step: state tracks " +
                     std::to_string(state.first_moment.size()) +
                     " parameters but " + std::to_string(params.size()) +
                     " were given");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].has_grad()) {
      throw UsageError("adam_step: parameter " + std::to_string(k) +
                       " has no gradient");
    }
    if (state.first_moment[k].size() != params[k].size()) {
      throw UsageError("adam_step: moment buffer " + std::to_string(k) +
                       " does not match parameter shape " +
                       to_string(params[k].shape()));
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto w = params[k].mutable_data();
    auto g = params[k].grad();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
    params[k].clear_grad();
  }
}

}  // namespace decompad::numerics
