#pragma once

// Table of differentiable numerics ops with random-input generators, shared
// by the unit gradient tests and the acceptance gradient suite.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gradcheck.hpp"

namespace decompad::testing {

struct OpCase {
  std::string name;
  std::function<std::vector<Tensor>(std::mt19937_64&)> make_inputs;
  std::function<Tensor(const std::vector<Tensor>&)> apply;
};

inline std::vector<OpCase> differentiable_op_cases() {
  namespace nx = numerics;
  auto two_by_three = [](std::mt19937_64& rng) {
    return std::vector<Tensor>{random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)};
  };
  auto one = [](std::mt19937_64& rng) {
    return std::vector<Tensor>{random_tensor({2, 3}, rng)};
  };
  const std::vector<std::ptrdiff_t> gather_idx{1, -1, 0, 1};
  const std::vector<std::ptrdiff_t> scatter_idx{2, 0, 2};
  return {
      {"matmul",
       [](std::mt19937_64& rng) {
         return std::vector<Tensor>{random_tensor({2, 3}, rng), random_tensor({3, 4}, rng)};
       },
       [](const auto& in) { return nx::matmul(in[0], in[1]); }},
      {"transpose", one, [](const auto& in) { return nx::transpose(in[0]); }},
      {"add", two_by_three, [](const auto& in) { return nx::add(in[0], in[1]); }},
      {"sub", two_by_three, [](const auto& in) { return nx::sub(in[0], in[1]); }},
      {"mul", two_by_three, [](const auto& in) { return nx::mul(in[0], in[1]); }},
      {"scale", one, [](const auto& in) { return nx::scale(in[0], -1.7); }},
      {"add_rowvec",
       [](std::mt19937_64& rng) {
         return std::vector<Tensor>{random_tensor({2, 3}, rng), random_tensor({1, 3}, rng)};
       },
       [](const auto& in) { return nx::add_rowvec(in[0], in[1]); }},
      {"concat_rows", two_by_three,
       [](const auto& in) { return nx::concat(std::span(in.data(), 2), 0); }},
      {"concat_cols", two_by_three,
       [](const auto& in) { return nx::concat(std::span(in.data(), 2), 1); }},
      {"slice_rows", one, [](const auto& in) { return nx::slice(in[0], 0, 1, 2); }},
      {"slice_cols", one, [](const auto& in) { return nx::slice(in[0], 1, 1, 3); }},
      {"reshape", one, [](const auto& in) { return nx::reshape(in[0], {3, 2}); }},
      {"gather_rows", one,
       [gather_idx](const auto& in) { return nx::gather_rows(in[0], gather_idx); }},
      {"scatter_add_rows",
       [](std::mt19937_64& rng) { return std::vector<Tensor>{random_tensor({3, 2}, rng)}; },
       [scatter_idx](const auto& in) { return nx::scatter_add_rows(in[0], scatter_idx, 3); }},
      {"sum", one, [](const auto& in) { return nx::sum(in[0]); }},
      {"mean", one, [](const auto& in) { return nx::mean(in[0]); }},
      {"sigmoid", one, [](const auto& in) { return nx::sigmoid(in[0]); }},
      {"tanh", one, [](const auto& in) { return nx::tanh(in[0]); }},
      {"relu", one, [](const auto& in) { return nx::relu(in[0]); }},
      {"softmax_axis0", one, [](const auto& in) { return nx::softmax(in[0], 0); }},
      {"softmax_axis1", one, [](const auto& in) { return nx::softmax(in[0], 1); }},
      {"sum_squares", one, [](const auto& in) { return nx::sum_squares(in[0]); }},
      {"mse_sum", two_by_three,
       [](const auto& in) { return nx::mse(in[0], in[1], nx::Reduction::kSum); }},
      {"mse_mean", two_by_three,
       [](const auto& in) { return nx::mse(in[0], in[1], nx::Reduction::kMean); }},
  };
}

}  // namespace decompad::testing
