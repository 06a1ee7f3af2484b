#include <cmath>
#include <random>

#include "doctest.h"
#include "support/op_cases.hpp"

#include "decompad/numerics/adam.hpp"
#include "decompad/numerics/ops.hpp"

using namespace decompad::numerics;
using decompad::testing::gradcheck;
using decompad::testing::project;

TEST_CASE("matmul by identity returns the operand") {
  Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
  Tensor a = Tensor::matrix(2, 3, {1, -2, 3, 4.5, 5, -6});
  Tensor c = matmul(eye, a);
  CHECK(c.shape() == a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(c[i] == a[i]);
}

TEST_CASE("softmax of equal logits is uniform") {
  Tensor s = softmax(Tensor::matrix(1, 3, {0, 0, 0}), 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("softmax lanes are on the simplex") {
  std::mt19937_64 rng(3);
  Tensor x = decompad::testing::random_tensor({5, 4}, rng, -20, 20, false);
  for (std::size_t axis : {0u, 1u}) {
    Tensor s = softmax(x, axis);
    const std::size_t lanes = axis == 1 ? 5 : 4, len = axis == 1 ? 4 : 5;
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      double total = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        const double v = axis == 1 ? s.at(lane, k) : s.at(k, lane);
        CHECK(v >= 0.0);
        total += v;
      }
      CHECK(std::abs(total - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("relu clamps negatives") {
  Tensor r = relu(Tensor({3}, {-1, 0, 2}));
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 2.0);
}

TEST_CASE("mse variants") {
  Tensor a({2}, {1, 2}), b({2}, {0, 2});
  CHECK(mse(a, a).item() == 0.0);
  CHECK(mse(a, b).item() == 1.0);
  CHECK(mse(Tensor({2}, {3, 4}), Tensor({2}, {0, 0})).item() == 25.0);
  CHECK(mse(Tensor({2}, {3, 4}), Tensor({2}, {0, 0}), Reduction::kMean).item() == 12.5);
}

TEST_CASE("shape errors name the op and shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({2, 3});
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("matmul"), DimensionError);
  CHECK_THROWS_WITH_AS(add(a, Tensor::zeros({3, 2})), doctest::Contains("[2x3] vs [3x2]"),
                       DimensionError);
  CHECK_THROWS_AS(mse(a, Tensor::zeros({6})), DimensionError);
  CHECK_THROWS_AS(add_rowvec(a, Tensor::zeros({1, 2})), DimensionError);
  CHECK_THROWS_AS(gather_rows(a, std::vector<std::ptrdiff_t>{2}), DimensionError);
  CHECK_THROWS_AS(reshape(a, {4, 2}), DimensionError);
}

TEST_CASE("backward of squared norm") {
  Tensor x({1}, {3.0}, true);
  Tape tape;
  auto active = tape.activate();
  Tensor loss = mse(x, Tensor::zeros({1}));
  backward(loss);
  REQUIRE(x.has_grad());
  CHECK(x.grad()[0] == 6.0);
  CHECK(tape.size() == 0);
}

TEST_CASE("backward of summed matmul is ones times X transpose") {
  Tensor u = Tensor::matrix(2, 2, {1, 2, 3, 4}, true);
  Tensor x = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  Tape tape;
  auto active = tape.activate();
  backward(sum(matmul(u, x)));
  // (ones[2x3] * x^T)[i][j] = sum_k x[j][k]
  CHECK(u.grad()[0] == 6.0);
  CHECK(u.grad()[1] == 15.0);
  CHECK(u.grad()[2] == 6.0);
  CHECK(u.grad()[3] == 15.0);
  CHECK_FALSE(x.has_grad());
}

TEST_CASE("backward usage errors") {
  Tape tape;
  auto active = tape.activate();
  Tensor x = Tensor::matrix(1, 2, {1, 2}, true);
  CHECK_THROWS_AS(backward(scale(x, 2.0)), UsageError);
  CHECK_THROWS_AS(backward(Tensor::scalar(1.0)), UsageError);
}

TEST_CASE("ops outside an active tape are not recorded") {
  Tensor x = Tensor::matrix(1, 2, {1, 2}, true);
  Tensor y = scale(x, 2.0);
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("tape replays in reverse recording order") {
  Tape tape;
  auto active = tape.activate();
  Tensor x = Tensor::matrix(2, 2, {1, 2, 3, 4}, true);
  Tensor y = tanh(matmul(x, x));
  Tensor loss = sum(y);
  REQUIRE(tape.size() == 3);
  CHECK(tape.nodes()[0].op == "matmul");
  CHECK(tape.nodes()[2].op == "sum");
}

TEST_CASE("every op matches central finite differences") {
  for (const auto& op : decompad::testing::differentiable_op_cases()) {
    CAPTURE(op.name);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 3; ++trial) {
      auto inputs = op.make_inputs(rng);
      auto res = gradcheck([&](const auto& in) { return project(op.apply(in), 5); }, inputs);
      CHECK(res.max_relative_error <= 1e-4);
    }
  }
}

TEST_CASE("gradients accumulate when a tensor is reused") {
  Tensor x({2}, {1.5, -2.0}, true);
  auto res = gradcheck(
      [](const auto& in) { return sum(mul(in[0], add(in[0], scale(in[0], 3.0)))); }, {x});
  CHECK(res.max_relative_error <= 1e-6);
}

TEST_CASE("adam leaves parameters alone under zero gradient") {
  std::vector<Tensor> params{Tensor({3}, {1, 2, 3}, true)};
  auto state = AdamState::for_params(params);
  {
    Tape tape;
    auto active = tape.activate();
    backward(scale(sum(params[0]), 0.0));
  }
  adam_step(params, state, 0.1);
  CHECK(params[0][0] == 1.0);
  CHECK(params[0][2] == 3.0);
  CHECK_FALSE(params[0].has_grad());
  CHECK(state.step == 1);
}

TEST_CASE("adam moves against a constant gradient") {
  std::vector<Tensor> params{Tensor({2}, {0.0, 0.0}, true)};
  auto state = AdamState::for_params(params);
  Tensor direction({2}, {2.0, -0.5});
  for (int i = 0; i < 25; ++i) {
    Tape tape;
    auto active = tape.activate();
    backward(sum(mul(params[0], direction)));
    adam_step(params, state, 0.01);
  }
  CHECK(params[0][0] < 0.0);
  CHECK(params[0][1] > 0.0);
}

namespace {
// Scalar ADAM reference written out directly from the update rule.
double scalar_adam_quadratic(double w, double lr, int steps) {
  double m = 0.0, v = 0.0;
  for (int t = 1; t <= steps; ++t) {
    const double g = 2.0 * (w - 3.0);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    w -= lr * mh / (std::sqrt(vh) + 1e-8);
  }
  return w;
}
}  // namespace

TEST_CASE("adam on a quadratic agrees with the scalar reference") {
  std::vector<Tensor> params{Tensor({1}, {0.0}, true)};
  auto state = AdamState::for_params(params);
  for (int i = 0; i < 200; ++i) {
    Tape tape;
    auto active = tape.activate();
    backward(mse(params[0], Tensor({1}, {3.0})));
    adam_step(params, state, 0.1);
  }
  const double reference = scalar_adam_quadratic(0.0, 0.1, 200);
  CHECK(std::abs(reference - 3.0) < 0.1);
  CHECK(std::abs(params[0][0] - 3.0) < 0.1);
  CHECK(params[0][0] == doctest::Approx(reference).epsilon(1e-12));
}

TEST_CASE("adam rejects missing gradients and mismatched state") {
  std::vector<Tensor> params{Tensor({2}, {0.0, 0.0}, true)};
  auto state = AdamState::for_params(params);
  CHECK_THROWS_AS(adam_step(params, state, 0.1), UsageError);
  AdamState empty;
  CHECK_THROWS_AS(adam_step(params, empty, 0.1), UsageError);
}

TEST_CASE("identical inputs give bit-identical gradients") {
  auto run = [] {
    std::mt19937_64 rng(99);
    Tensor a = decompad::testing::random_tensor({4, 5}, rng);
    Tensor b = decompad::testing::random_tensor({5, 3}, rng);
    Tape tape;
    auto active = tape.activate();
    backward(sum_squares(tanh(matmul(a, b))));
    return std::vector<double>(a.grad().begin(), a.grad().end());
  };
  CHECK(run() == run());
}
