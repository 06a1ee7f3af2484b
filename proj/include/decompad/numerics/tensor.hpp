#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace decompad::numerics {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

/// Raised when operand shapes do not conform for an operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised on API misuse: backward on a non-scalar, stepping without gradients.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient is accumulated
  bool requires_grad = false;

  bool has_grad() const { return !grad.empty(); }
  void accumulate_grad(std::size_t i, double g) {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    grad[i] += g;
  }
  std::span<double> grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

/// Shared handle to a dense row-major tensor of doubles.
///
/// Copies alias the same storage. Leaves created with requires_grad receive
/// gradients when a loss computed from them is back-propagated on an active
/// Tape; results of ops are read-only values.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->data.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return impl_->data; }
  /// Mutable access for leaves (parameter updates, data loading).
  std::span<double> mutable_data() { return impl_->data; }
  double operator[](std::size_t i) const { return impl_->data[i]; }
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool on) { impl_->requires_grad = on; }
  bool has_grad() const { return impl_->has_grad(); }
  std::span<const double> grad() const { return impl_->grad; }
  void clear_grad() { impl_->grad.clear(); }

  /// Deep copy with no gradient history.
  Tensor detach() const;

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

/// Wengert list of differentiable operations executed while the tape is
/// active on the current thread. Recording order is a topological order, so
/// backward() simply replays it in reverse.
class Tape {
 public:
  using BackwardFn = std::function<void(std::span<const double> grad_out)>;

  struct Node {
    std::string_view op;
    std::shared_ptr<TensorImpl> output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  ~Tape();

  /// RAII guard installing a tape as the thread's active tape.
  class Activation {
   public:
    explicit Activation(Tape& tape);
    ~Activation();
    Activation(const Activation&) = delete;
    Activation& operator=(const Activation&) = delete;

   private:
    Tape* previous_;
  };

  Activation activate() { return Activation(*this); }

  static Tape* active();

  void record(std::string_view op, const Tensor& output, BackwardFn fn);
  std::size_t size() const { return nodes_.size(); }
  std::span<const Node> nodes() const { return nodes_; }

  /// Populates grads of every requires_grad tensor reachable from `loss`,
  /// then clears the tape.
  void backward(const Tensor& loss);
  void clear() { nodes_.clear(); }

 private:
  std::vector<Node> nodes_;
};

/// Back-propagates through the thread's active tape.
void backward(const Tensor& loss);

/// True if an op on these inputs should be recorded.
bool should_record(std::initializer_list<const Tensor*> inputs);

}  // namespace decompad::numerics
