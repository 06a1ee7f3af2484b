#include "decompad/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "decompad/numerics/ops.hpp"

namespace decompad {

namespace ops = numerics;
using numerics::DimensionError;
using numerics::Shape;
using Index = std::vector<std::ptrdiff_t>;

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ModelError(what);
  };
  require(frame_length >= 1, "frame_length: must be >= 1");
  require(stride >= 1 && stride <= frame_length, "stride: must satisfy 1 <= stride <= frame_length");
  require(basis_count >= 1, "basis_count: must be >= 1");
  require(bottleneck_dim >= 1, "bottleneck_dim: must be >= 1");
  require(hidden_dim >= 1, "hidden_dim: must be >= 1");
  require(block_count >= 1, "block_count: must be >= 1");
  require(chunk_size >= 1, "chunk_size: must be >= 1");
}

// --- parameters ------------------------------------------------------------

namespace {

class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  Tensor uniform(std::size_t rows, std::size_t cols, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> data(rows * cols);
    for (double& v : data) v = dist(rng_);
    return Tensor::matrix(rows, cols, std::move(data), true);
  }

 private:
  std::mt19937_64 rng_;
};

LstmParams init_lstm(Initializer& init, std::size_t in, std::size_t H) {
  return {init.uniform(in, 4 * H, in), init.uniform(H, 4 * H, H), init.uniform(1, 4 * H, H)};
}

BiLstmParams init_bilstm(Initializer& init, std::size_t F, std::size_t H) {
  BiLstmParams p;
  p.forward = init_lstm(init, F, H);
  p.backward = init_lstm(init, F, H);
  p.proj = init.uniform(2 * H, F, 2 * H);
  p.proj_bias = init.uniform(1, F, 2 * H);
  return p;
}

void push_lstm(std::vector<NamedParam>& out, const std::string& prefix, const LstmParams& p) {
  out.push_back({prefix + ".w_ih", p.w_ih});
  out.push_back({prefix + ".w_hh", p.w_hh});
  out.push_back({prefix + ".bias", p.bias});
}

void push_bilstm(std::vector<NamedParam>& out, const std::string& prefix, const BiLstmParams& p) {
  push_lstm(out, prefix + ".fwd", p.forward);
  push_lstm(out, prefix + ".bwd", p.backward);
  out.push_back({prefix + ".proj", p.proj});
  out.push_back({prefix + ".proj_bias", p.proj_bias});
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t L = config.frame_length, N = config.basis_count;
  const std::size_t F = config.bottleneck_dim, H = config.hidden_dim;
  Initializer init(seed);
  ModelParams p;
  p.U = init.uniform(N, L, L);
  p.V = init.uniform(N, L, N);
  p.bottleneck = init.uniform(N, F, N);
  p.bottleneck_bias = init.uniform(1, F, N);
  for (int b = 0; b < config.block_count; ++b) {
    DualPathBlockParams block;
    block.intra = init_bilstm(init, F, H);
    block.inter = init_bilstm(init, F, H);
    p.blocks.push_back(std::move(block));
  }
  p.output = init.uniform(F, 3 * N, F);
  p.output_bias = init.uniform(1, 3 * N, F);
  return p;
}

std::vector<NamedParam> ModelParams::named() const {
  std::vector<NamedParam> out{{"U", U}, {"V", V}, {"bottleneck", bottleneck},
                              {"bottleneck_bias", bottleneck_bias}};
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string prefix = "block" + std::to_string(b);
    push_bilstm(out, prefix + ".intra", blocks[b].intra);
    push_bilstm(out, prefix + ".inter", blocks[b].inter);
  }
  out.push_back({"output", output});
  out.push_back({"output_bias", output_bias});
  return out;
}

std::vector<Tensor> ModelParams::list() const {
  std::vector<Tensor> out;
  for (auto& np : named()) out.push_back(np.tensor);
  return out;
}

std::vector<Tensor> ModelParams::trainable(const ModelConfig& config) const {
  if (config.separator_enabled) return list();
  return {U, V};
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (auto& np : named()) n += np.tensor.size();
  return n;
}

// --- framing ---------------------------------------------------------------

int frame_count(int P, int L, int S) {
  if (L < 1 || S < 1) throw DimensionError("frame: L and S must be >= 1");
  if (P < L) {
    throw DimensionError("frame: series length " + std::to_string(P) +
                         " shorter than frame length " + std::to_string(L));
  }
  return (P - L + S - 1) / S + 1;
}

namespace {

// Sample index of every (frame, offset) cell in row-major K x L order, for a
// batch of B series of length P stored back to back; -1 marks padding.
Index framing_index(int B, int P, int L, int S) {
  const int K = frame_count(P, L, S);
  Index idx(static_cast<std::size_t>(B) * K * L);
  std::size_t i = 0;
  for (int b = 0; b < B; ++b) {
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < L; ++l) {
        const int t = k * S + l;
        idx[i++] = t < P ? static_cast<std::ptrdiff_t>(b) * P + t : -1;
      }
    }
  }
  return idx;
}

std::vector<double> contribution_counts(int P, int L, int S) {
  const int K = frame_count(P, L, S);
  std::vector<double> counts(P, 0.0);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      if (k * S + l < P) counts[k * S + l] += 1.0;
    }
  }
  return counts;
}

}  // namespace

Tensor frame(std::span<const double> series, int L, int S) {
  const int P = static_cast<int>(series.size());
  const int K = frame_count(P, L, S);
  std::vector<double> data(static_cast<std::size_t>(L) * K, 0.0);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const int t = k * S + l;
      if (t < P) data[static_cast<std::size_t>(l) * K + k] = series[t];
    }
  }
  return Tensor::matrix(L, K, std::move(data));
}

std::vector<double> overlap_add(const Tensor& frames, int S, int P) {
  if (frames.rank() != 2) throw DimensionError("overlap_add: frames must be a matrix");
  const int L = static_cast<int>(frames.rows());
  const int K = static_cast<int>(frames.cols());
  if (K != frame_count(P, L, S)) {
    throw DimensionError("overlap_add: " + std::to_string(K) + " frames do not tile length " +
                         std::to_string(P) + " with L=" + std::to_string(L) +
                         ", S=" + std::to_string(S));
  }
  std::vector<double> out(P, 0.0);
  const auto counts = contribution_counts(P, L, S);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const int t = k * S + l;
      if (t < P) out[t] += frames.at(l, k);
    }
  }
  for (int t = 0; t < P; ++t) out[t] /= counts[t];
  return out;
}

Tensor encode(const Tensor& X, const Tensor& U) {
  if (X.rank() != 2 || U.rank() != 2 || U.cols() != X.rows()) {
    throw DimensionError("encode: U " + numerics::to_string(U.shape()) + " does not map frames " +
                         numerics::to_string(X.shape()));
  }
  return ops::matmul(U, X);
}

// --- separator -------------------------------------------------------------

namespace {

// Rows visited by a set of equal-length sequences. Step t touches rows
// steps[t*count .. (t+1)*count). `inverse` maps each data row to its
// position in the step-major output stack.
struct SequenceLayout {
  std::size_t count = 0;
  std::size_t length = 0;
  Index steps;
  Index inverse;

  SequenceLayout reversed() const {
    SequenceLayout r{count, length, Index(steps.size()), {}};
    for (std::size_t t = 0; t < length; ++t) {
      std::copy_n(steps.begin() + (length - 1 - t) * count, count, r.steps.begin() + t * count);
    }
    r.build_inverse();
    return r;
  }

  void build_inverse() {
    inverse.assign(steps.size(), -1);
    for (std::size_t p = 0; p < steps.size(); ++p) inverse[steps[p]] = static_cast<std::ptrdiff_t>(p);
  }
};

struct ChunkLayout {
  std::size_t chunks = 0;   // per series
  Index gather;             // chunked row -> frame row (or -1)
  Tensor inverse_counts;    // (B*K) x F
  SequenceLayout intra;
  SequenceLayout inter;
};

ChunkLayout chunk_layout(std::size_t B, std::size_t K, std::size_t F, const ModelConfig& config) {
  const std::size_t chunk = config.chunk_size;
  const std::size_t hop = config.chunk_hop();
  ChunkLayout c;
  c.chunks = K <= chunk ? 1 : (K - chunk + hop - 1) / hop + 1;
  const std::size_t C = c.chunks;
  const std::size_t rows = B * C * chunk;
  c.gather.assign(rows, -1);
  std::vector<double> counts(B * K, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t ci = 0; ci < C; ++ci) {
      for (std::size_t j = 0; j < chunk; ++j) {
        const std::size_t k = ci * hop + j;
        if (k < K) {
          c.gather[(b * C + ci) * chunk + j] = static_cast<std::ptrdiff_t>(b * K + k);
          counts[b * K + k] += 1.0;
        }
      }
    }
  }
  std::vector<double> inv(B * K * F);
  for (std::size_t r = 0; r < B * K; ++r) {
    std::fill_n(inv.begin() + r * F, F, 1.0 / counts[r]);
  }
  c.inverse_counts = Tensor::matrix(B * K, F, std::move(inv));

  c.intra = {B * C, chunk, Index(rows), {}};
  for (std::size_t j = 0; j < chunk; ++j) {
    for (std::size_t s = 0; s < B * C; ++s) c.intra.steps[j * B * C + s] = s * chunk + j;
  }
  c.intra.build_inverse();

  c.inter = {B * chunk, C, Index(rows), {}};
  for (std::size_t ci = 0; ci < C; ++ci) {
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t j = 0; j < chunk; ++j) {
        c.inter.steps[ci * B * chunk + b * chunk + j] = (b * C + ci) * chunk + j;
      }
    }
  }
  c.inter.build_inverse();
  return c;
}

Tensor lstm_pass(const Tensor& X, const SequenceLayout& layout, const LstmParams& p) {
  const std::size_t H = p.w_hh.rows();
  const Tensor pre = ops::add_rowvec(ops::matmul(X, p.w_ih), p.bias);
  std::vector<Tensor> outputs;
  outputs.reserve(layout.length);
  Tensor h, c;
  for (std::size_t t = 0; t < layout.length; ++t) {
    std::span<const std::ptrdiff_t> rows(layout.steps.data() + t * layout.count, layout.count);
    Tensor g = ops::gather_rows(pre, rows);
    if (t > 0) g = ops::add(g, ops::matmul(h, p.w_hh));
    const Tensor i = ops::sigmoid(ops::slice(g, 1, 0, H));
    const Tensor f = ops::sigmoid(ops::slice(g, 1, H, 2 * H));
    const Tensor cand = ops::tanh(ops::slice(g, 1, 2 * H, 3 * H));
    const Tensor o = ops::sigmoid(ops::slice(g, 1, 3 * H, 4 * H));
    c = t == 0 ? ops::mul(i, cand) : ops::add(ops::mul(f, c), ops::mul(i, cand));
    h = ops::mul(o, ops::tanh(c));
    outputs.push_back(h);
  }
  return ops::gather_rows(ops::concat(outputs, 0), layout.inverse);
}

Tensor bilstm(const Tensor& X, const SequenceLayout& layout, const BiLstmParams& p) {
  const Tensor both[] = {lstm_pass(X, layout, p.forward), lstm_pass(X, layout.reversed(), p.backward)};
  return ops::add_rowvec(ops::matmul(ops::concat(both, 1), p.proj), p.proj_bias);
}

void check_params(const ModelParams& params, const ModelConfig& config) {
  if (!params.initialized()) throw ModelError("separator parameters are not initialized");
  const std::size_t N = config.basis_count, L = config.frame_length;
  if (params.U.shape() != Shape{N, L} || params.V.shape() != Shape{N, L}) {
    throw DimensionError("model parameters do not match basis_count/frame_length of the config");
  }
  if (config.separator_enabled &&
      (params.blocks.size() != static_cast<std::size_t>(config.block_count) ||
       params.output.shape() != Shape{static_cast<std::size_t>(config.bottleneck_dim), 3 * N})) {
    throw DimensionError("separator parameters do not match the config");
  }
}

// Et: (B*K) x N, frames as rows. Returns per-component masks in the same
// layout.
std::array<Tensor, 3> separator_masks(const Tensor& Et, std::size_t B, const ModelParams& params,
                                      const ModelConfig& config) {
  const std::size_t N = config.basis_count, F = config.bottleneck_dim;
  const std::size_t K = Et.rows() / B;
  const ChunkLayout layout = chunk_layout(B, K, F, config);

  const Tensor z = ops::add_rowvec(ops::matmul(Et, params.bottleneck), params.bottleneck_bias);
  Tensor zc = ops::gather_rows(z, layout.gather);
  for (const auto& block : params.blocks) {
    zc = ops::add(zc, bilstm(zc, layout.intra, block.intra));
    zc = ops::add(zc, bilstm(zc, layout.inter, block.inter));
  }
  const Tensor merged = ops::mul(ops::scatter_add_rows(zc, layout.gather, B * K), layout.inverse_counts);
  const Tensor logits = ops::add_rowvec(ops::matmul(merged, params.output), params.output_bias);
  const Tensor probs = ops::softmax(ops::reshape(logits, {B * K * N, 3}), 1);
  std::array<Tensor, 3> masks;
  for (std::size_t c = 0; c < 3; ++c) {
    masks[c] = ops::reshape(ops::slice(probs, 1, c, c + 1), {B * K, N});
  }
  return masks;
}

// frames: (B*K) x L rows -> B x P series.
Tensor overlap_add_batch(const Tensor& frames, std::size_t B, int P, int L, int S) {
  const Index idx = framing_index(static_cast<int>(B), P, L, S);
  const auto counts = contribution_counts(P, L, S);
  std::vector<double> inv(B * P);
  for (std::size_t b = 0; b < B; ++b) {
    for (int t = 0; t < P; ++t) inv[b * P + t] = 1.0 / counts[t];
  }
  const Tensor flat = ops::reshape(frames, {frames.size(), 1});
  const Tensor summed = ops::scatter_add_rows(flat, idx, B * P);
  return ops::reshape(ops::mul(summed, Tensor({B * P, 1}, std::move(inv))), {B, static_cast<std::size_t>(P)});
}

}  // namespace

MaskSet separate(const Tensor& E, const ModelParams& params, const ModelConfig& config) {
  check_params(params, config);
  if (E.rank() != 2 || E.rows() != static_cast<std::size_t>(config.basis_count)) {
    throw DimensionError("separate: encoding " + numerics::to_string(E.shape()) +
                         " does not have basis_count rows");
  }
  auto masks = separator_masks(ops::transpose(E), 1, params, config);
  return {ops::transpose(masks[0]), ops::transpose(masks[1]), ops::transpose(masks[2])};
}

MaskedEncoding apply_masks(const Tensor& E, const MaskSet& masks) {
  return {ops::mul(masks.trend, E), ops::mul(masks.seasonal, E), ops::mul(masks.remainder, E)};
}

std::vector<double> decode(const Tensor& E_c, const Tensor& V, int S, int P) {
  if (E_c.rank() != 2 || V.rank() != 2 || E_c.rows() != V.rows()) {
    throw DimensionError("decode: encoding " + numerics::to_string(E_c.shape()) +
                         " does not match bases " + numerics::to_string(V.shape()));
  }
  return overlap_add(ops::transpose(ops::matmul(ops::transpose(E_c), V)), S, P);
}

BatchDecomposition forward(const Tensor& blocks, const ModelParams& params, const ModelConfig& config) {
  check_params(params, config);
  if (blocks.rank() != 2) throw DimensionError("forward: blocks must be B x P");
  const std::size_t B = blocks.rows();
  const int P = static_cast<int>(blocks.cols());
  const int L = config.frame_length, S = config.stride;

  const Tensor x = ops::gather_rows(ops::reshape(blocks, {blocks.size(), 1}), framing_index(B, P, L, S));
  const std::size_t K = x.rows() / (B * L);
  const Tensor Xt = ops::reshape(x, {B * K, static_cast<std::size_t>(L)});
  const Tensor Et = ops::matmul(Xt, ops::transpose(params.U));
  const Tensor Vt = params.V;

  if (!config.separator_enabled) {
    const Tensor zero = Tensor::zeros({B, static_cast<std::size_t>(P)});
    return {overlap_add_batch(ops::matmul(Et, Vt), B, P, L, S), zero, zero};
  }
  auto masks = separator_masks(Et, B, params, config);
  auto component = [&](const Tensor& m) {
    return overlap_add_batch(ops::matmul(ops::mul(m, Et), Vt), B, P, L, S);
  };
  return {component(masks[0]), component(masks[1]), component(masks[2])};
}

Decomposition decompose(std::span<const double> series, const ModelParams& params,
                        const ModelConfig& config) {
  const std::size_t P = series.size();
  frame_count(static_cast<int>(P), config.frame_length, config.stride);
  const Tensor block({1, P}, std::vector<double>(series.begin(), series.end()));
  const auto out = forward(block, params, config);
  auto to_vec = [](const Tensor& t) { return std::vector<double>(t.data().begin(), t.data().end()); };
  return {to_vec(out.trend), to_vec(out.seasonal), to_vec(out.remainder)};
}

}  // namespace decompad
