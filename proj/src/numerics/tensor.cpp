#include "decompad/numerics/tensor.hpp"

#include <numeric>
#include <sstream>

namespace decompad::numerics {

namespace {
thread_local Tape* g_active_tape = nullptr;
}  // namespace

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<TensorImpl>()) {
  if (element_count(shape) != data.size()) {
    throw DimensionError("tensor: shape " + to_string(shape) + " holds " +
                         std::to_string(element_count(shape)) +
                         " elements but " + std::to_string(data.size()) +
                         " values were given");
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  const std::size_t n = element_count(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> data, bool requires_grad) {
  return Tensor({rows, cols}, std::move(data), requires_grad);
}

std::size_t Tensor::rows() const {
  if (rank() != 2) {
    throw DimensionError("rows: expected a matrix, got " + to_string(shape()));
  }
  return impl_->shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) {
    throw DimensionError("cols: expected a matrix, got " + to_string(shape()));
  }
  return impl_->shape[1];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return impl_->data[r * cols() + c];
}

double Tensor::item() const {
  if (size() != 1) {
    throw UsageError("item: tensor of shape " + to_string(shape()) +
                     " is not a scalar");
  }
  return impl_->data[0];
}

Tensor Tensor::detach() const {
  return Tensor(impl_->shape, impl_->data, false);
}

Tape::~Tape() {
  if (g_active_tape == this) g_active_tape = nullptr;
}

Tape::Activation::Activation(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

Tape::Activation::~Activation() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::string_view op, const Tensor& output, BackwardFn fn) {
  nodes_.push_back(Node{op, output.impl(), std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw UsageError("backward: loss must be a scalar, got shape " +
                     (loss.defined() ? to_string(loss.shape()) : "<null>"));
  }
  if (!loss.requires_grad()) {
    throw UsageError("backward: loss is not connected to the tape");
  }
  loss.impl()->grad_buffer()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output->has_grad()) it->backward(it->output->grad);
  }
  nodes_.clear();
}

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (tape == nullptr) throw UsageError("backward: no active tape");
  tape->backward(loss);
}

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (Tape::active() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

}  // namespace decompad::numerics
