#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "decompad/numerics/tensor.hpp"

// Differentiable operations. Matrix ops require rank-2 operands; elementwise
// ops require identical shapes. There is no implicit broadcasting: the only
// mixed-shape ops are scale() (scalar times tensor) and add_rowvec() (an
// explicit per-row bias). Every op records itself on the active tape when
// one of its inputs requires a gradient.

namespace decompad::numerics {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// a[R×C] + bias[1×C] added to every row.
Tensor add_rowvec(const Tensor& a, const Tensor& bias);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin,
             std::size_t end);
Tensor reshape(const Tensor& a, Shape shape);

/// out row i = a row index[i]; index -1 yields a zero row.
Tensor gather_rows(const Tensor& a, std::span<const std::ptrdiff_t> index);
/// out[index[i]] += a row i, for an output with `out_rows` rows; index -1
/// drops the row. Adjoint of gather_rows.
Tensor scatter_add_rows(const Tensor& a, std::span<const std::ptrdiff_t> index,
                        std::size_t out_rows);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor softmax(const Tensor& a, std::size_t axis);

Tensor sum_squares(const Tensor& a);

enum class Reduction { kSum, kMean };

/// Squared error between a and b: sum of squares or its per-element mean.
Tensor mse(const Tensor& a, const Tensor& b, Reduction reduction = Reduction::kSum);

}  // namespace decompad::numerics
