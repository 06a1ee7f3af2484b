#include "decompad/numerics/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace decompad::numerics {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

using ImplPtr = std::shared_ptr<TensorImpl>;

void require_matrix(const char* op, const Tensor& a) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         to_string(a.shape()));
  }
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

// Creates the op result and, when needed, records its backward closure.
template <typename Fn>
Tensor finish(const char* op, Shape shape, std::vector<double> data,
              std::initializer_list<const Tensor*> inputs, Fn&& make_backward) {
  const bool record = should_record(inputs);
  Tensor out(std::move(shape), std::move(data), record);
  if (record) {
    Tape::active()->record(op, out, make_backward(out.impl().get()));
  }
  return out;
}

ConstMap as_matrix(const TensorImpl& t) {
  return ConstMap(t.data.data(), static_cast<Eigen::Index>(t.shape[0]),
                  static_cast<Eigen::Index>(t.shape[1]));
}

MutMap grad_matrix(TensorImpl& t) {
  return MutMap(t.grad_buffer().data(), static_cast<Eigen::Index>(t.shape[0]),
                static_cast<Eigen::Index>(t.shape[1]));
}

template <typename UnaryFn>
std::vector<double> map_values(std::span<const double> in, UnaryFn fn) {
  std::vector<double> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(), fn);
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " +
                         to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  const std::size_t m = a.rows(), n = b.cols();
  std::vector<double> data(m * n);
  MutMap(data.data(), m, n).noalias() = as_matrix(*a.impl()) * as_matrix(*b.impl());
  return finish("matmul", {m, n}, std::move(data), {&a, &b},
                [ai = a.impl(), bi = b.impl()](TensorImpl* out) {
                  return [ai, bi, out](std::span<const double> g) {
                    ConstMap gm(g.data(), out->shape[0], out->shape[1]);
                    if (ai->requires_grad) {
                      grad_matrix(*ai).noalias() += gm * as_matrix(*bi).transpose();
                    }
                    if (bi->requires_grad) {
                      grad_matrix(*bi).noalias() += as_matrix(*ai).transpose() * gm;
                    }
                  };
                });
}

Tensor transpose(const Tensor& a) {
  require_matrix("transpose", a);
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> data(r * c);
  MutMap(data.data(), c, r) = as_matrix(*a.impl()).transpose();
  return finish("transpose", {c, r}, std::move(data), {&a},
                [ai = a.impl()](TensorImpl* out) {
                  return [ai, out](std::span<const double> g) {
                    if (!ai->requires_grad) return;
                    ConstMap gm(g.data(), out->shape[0], out->shape[1]);
                    grad_matrix(*ai) += gm.transpose();
                  };
                });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> data(a.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = a[i] + b[i];
  return finish("add", a.shape(), std::move(data), {&a, &b},
                [ai = a.impl(), bi = b.impl()](TensorImpl*) {
                  return [ai, bi](std::span<const double> g) {
                    for (const auto& t : {ai, bi}) {
                      if (!t->requires_grad) continue;
                      auto buf = t->grad_buffer();
                      for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
                    }
                  };
                });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<double> data(a.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = a[i] - b[i];
  return finish("sub", a.shape(), std::move(data), {&a, &b},
                [ai = a.impl(), bi = b.impl()](TensorImpl*) {
                  return [ai, bi](std::span<const double> g) {
                    if (ai->requires_grad) {
                      auto buf = ai->grad_buffer();
                      for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
                    }
                    if (bi->requires_grad) {
                      auto buf = bi->grad_buffer();
                      for (std::size_t i = 0; i < g.size(); ++i) buf[i] -= g[i];
                    }
                  };
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> data(a.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = a[i] * b[i];
  return finish("mul", a.shape(), std::move(data), {&a, &b},
                [ai = a.impl(), bi = b.impl()](TensorImpl*) {
                  return [ai, bi](std::span<const double> g) {
                    if (ai->requires_grad) {
                      auto buf = ai->grad_buffer();
                      for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i] * bi->data[i];
                    }
                    if (bi->requires_grad) {
                      auto buf = bi->grad_buffer();
                      for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i] * ai->data[i];
                    }
                  };
                });
}

Tensor scale(const Tensor& a, double factor) {
  auto data = map_values(a.data(), [factor](double v) { return v * factor; });
  return finish("scale", a.shape(), std::move(data), {&a},
                [ai = a.impl(), factor](TensorImpl*) {
                  return [ai, factor](std::span<const double> g) {
                    auto buf = ai->grad_buffer();
                    for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i] * factor;
                  };
                });
}

Tensor add_rowvec(const Tensor& a, const Tensor& bias) {
  require_matrix("add_rowvec", a);
  require_matrix("add_rowvec", bias);
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw DimensionError("add_rowvec: bias " + to_string(bias.shape()) +
                         " does not match rows of " + to_string(a.shape()));
  }
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> data(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) data[i * c + j] = a[i * c + j] + bias[j];
  }
  return finish("add_rowvec", a.shape(), std::move(data), {&a, &bias},
                [ai = a.impl(), bi = bias.impl(), r, c](TensorImpl*) {
                  return [ai, bi, r, c](std::span<const double> g) {
                    if (ai->requires_grad) {
                      auto buf = ai->grad_buffer();
                      for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
                    }
                    if (bi->requires_grad) {
                      auto buf = bi->grad_buffer();
                      for (std::size_t i = 0; i < r; ++i) {
                        for (std::size_t j = 0; j < c; ++j) buf[j] += g[i * c + j];
                      }
                    }
                  };
                });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  if (axis > 1) throw DimensionError("concat: axis must be 0 or 1");
  for (const auto& p : parts) require_matrix("concat", p);
  const std::size_t other = 1 - axis;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.shape()[other] != parts[0].shape()[other]) {
      throw DimensionError("concat: shapes " + to_string(parts[0].shape()) +
                           " and " + to_string(p.shape()) +
                           " disagree off the concatenation axis");
    }
    total += p.shape()[axis];
  }
  Shape shape = parts[0].shape();
  shape[axis] = total;
  const std::size_t out_cols = shape[1];
  std::vector<double> data(shape[0] * shape[1]);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t pr = p.rows(), pc = p.cols();
    for (std::size_t i = 0; i < pr; ++i) {
      for (std::size_t j = 0; j < pc; ++j) {
        const std::size_t oi = axis == 0 ? offset + i : i;
        const std::size_t oj = axis == 0 ? j : offset + j;
        data[oi * out_cols + oj] = p[i * pc + j];
      }
    }
    offset += p.shape()[axis];
  }

  bool record = Tape::active() != nullptr &&
                std::any_of(parts.begin(), parts.end(),
                            [](const Tensor& p) { return p.requires_grad(); });
  Tensor out(shape, std::move(data), record);
  if (record) {
    std::vector<ImplPtr> impls;
    for (const auto& p : parts) impls.push_back(p.impl());
    Tape::active()->record(
        "concat", out,
        [impls = std::move(impls), offsets = std::move(offsets), axis,
         out_cols](std::span<const double> g) {
          for (std::size_t k = 0; k < impls.size(); ++k) {
            auto& p = *impls[k];
            if (!p.requires_grad) continue;
            auto buf = p.grad_buffer();
            const std::size_t pr = p.shape[0], pc = p.shape[1];
            for (std::size_t i = 0; i < pr; ++i) {
              for (std::size_t j = 0; j < pc; ++j) {
                const std::size_t oi = axis == 0 ? offsets[k] + i : i;
                const std::size_t oj = axis == 0 ? j : offsets[k] + j;
                buf[i * pc + j] += g[oi * out_cols + oj];
              }
            }
          }
        });
  }
  return out;
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin,
             std::size_t end) {
  require_matrix("slice", a);
  if (axis > 1) throw DimensionError("slice: axis must be 0 or 1");
  if (begin >= end || end > a.shape()[axis]) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for axis " +
                         std::to_string(axis) + " of " + to_string(a.shape()));
  }
  const std::size_t in_cols = a.cols();
  Shape shape = a.shape();
  shape[axis] = end - begin;
  const std::size_t r = shape[0], c = shape[1];
  const std::size_t row0 = axis == 0 ? begin : 0;
  const std::size_t col0 = axis == 1 ? begin : 0;
  std::vector<double> data(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(a.data().begin() + (row0 + i) * in_cols + col0, c,
                data.begin() + i * c);
  }
  return finish("slice", shape, std::move(data), {&a},
                [ai = a.impl(), r, c, row0, col0, in_cols](TensorImpl*) {
                  return [ai, r, c, row0, col0, in_cols](std::span<const double> g) {
                    auto buf = ai->grad_buffer();
                    for (std::size_t i = 0; i < r; ++i) {
                      for (std::size_t j = 0; j < c; ++j) {
                        buf[(row0 + i) * in_cols + col0 + j] += g[i * c + j];
                      }
                    }
                  };
                });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (element_count(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + to_string(a.shape()) +
                         " as " + to_string(shape));
  }
  std::vector<double> data(a.data().begin(), a.data().end());
  return finish("reshape", std::move(shape), std::move(data), {&a},
                [ai = a.impl()](TensorImpl*) {
                  return [ai](std::span<const double> g) {
                    auto buf = ai->grad_buffer();
                    for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
                  };
                });
}

Tensor gather_rows(const Tensor& a, std::span<const std::ptrdiff_t> index) {
  require_matrix("gather_rows", a);
  const std::size_t c = a.cols();
  const auto nrows = static_cast<std::ptrdiff_t>(a.rows());
  std::vector<double> data(index.size() * c, 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::ptrdiff_t src = index[i];
    if (src < -1 || src >= nrows) {
      throw DimensionError("gather_rows: index " + std::to_string(src) +
                           " out of range for " + to_string(a.shape()));
    }
    if (src >= 0) {
      std::copy_n(a.data().begin() + src * c, c, data.begin() + i * c);
    }
  }
  std::vector<std::ptrdiff_t> idx(index.begin(), index.end());
  return finish("gather_rows", {index.size(), c}, std::move(data), {&a},
                [ai = a.impl(), idx = std::move(idx), c](TensorImpl*) mutable {
                  return [ai, idx = std::move(idx), c](std::span<const double> g) {
                    auto buf = ai->grad_buffer();
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      if (idx[i] < 0) continue;
                      for (std::size_t j = 0; j < c; ++j) buf[idx[i] * c + j] += g[i * c + j];
                    }
                  };
                });
}

Tensor scatter_add_rows(const Tensor& a, std::span<const std::ptrdiff_t> index,
                        std::size_t out_rows) {
  require_matrix("scatter_add_rows", a);
  if (index.size() != a.rows()) {
    throw DimensionError("scatter_add_rows: " + std::to_string(index.size()) +
                         " indices for " + to_string(a.shape()));
  }
  const std::size_t c = a.cols();
  std::vector<double> data(out_rows * c, 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::ptrdiff_t dst = index[i];
    if (dst < -1 || dst >= static_cast<std::ptrdiff_t>(out_rows)) {
      throw DimensionError("scatter_add_rows: index " + std::to_string(dst) +
                           " out of range for " + std::to_string(out_rows) +
                           " output rows");
    }
    if (dst < 0) continue;
    for (std::size_t j = 0; j < c; ++j) data[dst * c + j] += a[i * c + j];
  }
  std::vector<std::ptrdiff_t> idx(index.begin(), index.end());
  return finish("scatter_add_rows", {out_rows, c}, std::move(data), {&a},
                [ai = a.impl(), idx = std::move(idx), c](TensorImpl*) mutable {
                  return [ai, idx = std::move(idx), c](std::span<const double> g) {
                    auto buf = ai->grad_buffer();
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      if (idx[i] < 0) continue;
                      for (std::size_t j = 0; j < c; ++j) buf[i * c + j] += g[idx[i] * c + j];
                    }
                  };
                });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return finish("sum", {1}, {total}, {&a}, [ai = a.impl()](TensorImpl*) {
    return [ai](std::span<const double> g) {
      auto buf = ai->grad_buffer();
      for (double& b : buf) b += g[0];
    };
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw DimensionError("mean: empty tensor");
  double total = 0.0;
  for (double v : a.data()) total += v;
  const double n = static_cast<double>(a.size());
  return finish("mean", {1}, {total / n}, {&a}, [ai = a.impl(), n](TensorImpl*) {
    return [ai, n](std::span<const double> g) {
      auto buf = ai->grad_buffer();
      for (double& b : buf) b += g[0] / n;
    };
  });
}

Tensor sigmoid(const Tensor& a) {
  auto data = map_values(a.data(), [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  return finish("sigmoid", a.shape(), std::move(data), {&a},
                [ai = a.impl()](TensorImpl* out) {
                  return [ai, out](std::span<const double> g) {
                    auto buf = ai->grad_buffer();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      const double y = out->data[i];
                      buf[i] += g[i] * y * (1.0 - y);
                    }
                  };
                });
}

Tensor tanh(const Tensor& a) {
  auto data = map_values(a.data(), [](double v) { return std::tanh(v); });
  return finish("tanh", a.shape(), std::move(data), {&a},
                [ai = a.impl()](TensorImpl* out) {
                  return [ai, out](std::span<const double> g) {
                    auto buf = ai->grad_buffer();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      const double y = out->data[i];
                      buf[i] += g[i] * (1.0 - y * y);
                    }
                  };
                });
}

Tensor relu(const Tensor& a) {
  auto data = map_values(a.data(), [](double v) { return v > 0.0 ? v : 0.0; });
  return finish("relu", a.shape(), std::move(data), {&a},
                [ai = a.impl()](TensorImpl*) {
                  return [ai](std::span<const double> g) {
                    auto buf = ai->grad_buffer();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      if (ai->data[i] > 0.0) buf[i] += g[i];
                    }
                  };
                });
}

Tensor softmax(const Tensor& a, std::size_t axis) {
  require_matrix("softmax", a);
  if (axis > 1) throw DimensionError("softmax: axis must be 0 or 1");
  const std::size_t r = a.rows(), c = a.cols();
  // Iterate over "lanes": each lane is one row (axis 1) or one column (axis 0).
  const std::size_t lanes = axis == 1 ? r : c;
  const std::size_t len = axis == 1 ? c : r;
  const std::size_t lane_stride = axis == 1 ? c : 1;
  const std::size_t elem_stride = axis == 1 ? 1 : c;
  std::vector<double> data(r * c);
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    const std::size_t base = lane * lane_stride;
    double peak = a[base];
    for (std::size_t k = 1; k < len; ++k) peak = std::max(peak, a[base + k * elem_stride]);
    double z = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const double e = std::exp(a[base + k * elem_stride] - peak);
      data[base + k * elem_stride] = e;
      z += e;
    }
    for (std::size_t k = 0; k < len; ++k) data[base + k * elem_stride] /= z;
  }
  return finish(
      "softmax", a.shape(), std::move(data), {&a},
      [ai = a.impl(), lanes, len, lane_stride, elem_stride](TensorImpl* out) {
        return [ai, out, lanes, len, lane_stride, elem_stride](std::span<const double> g) {
          auto buf = ai->grad_buffer();
          const auto& y = out->data;
          for (std::size_t lane = 0; lane < lanes; ++lane) {
            const std::size_t base = lane * lane_stride;
            double dot = 0.0;
            for (std::size_t k = 0; k < len; ++k) {
              const std::size_t i = base + k * elem_stride;
              dot += g[i] * y[i];
            }
            for (std::size_t k = 0; k < len; ++k) {
              const std::size_t i = base + k * elem_stride;
              buf[i] += y[i] * (g[i] - dot);
            }
          }
        };
      });
}

Tensor sum_squares(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v * v;
  return finish("sum_squares", {1}, {total}, {&a}, [ai = a.impl()](TensorImpl*) {
    return [ai](std::span<const double> g) {
      auto buf = ai->grad_buffer();
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += 2.0 * g[0] * ai->data[i];
    };
  });
}

Tensor mse(const Tensor& a, const Tensor& b, Reduction reduction) {
  require_same_shape("mse", a, b);
  Tensor total = sum_squares(sub(a, b));
  if (reduction == Reduction::kSum) return total;
  return scale(total, 1.0 / static_cast<double>(a.size()));
}

}  // namespace decompad::numerics
