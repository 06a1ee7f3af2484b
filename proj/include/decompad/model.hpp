#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "decompad/numerics/tensor.hpp"

namespace decompad {

using numerics::Tensor;

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelConfig {
  int frame_length = 2;  // L
  int stride = 1;        // S
  int basis_count = 32;  // N
  int bottleneck_dim = 16;
  int hidden_dim = 32;
  int block_count = 2;
  int chunk_size = 16;
  bool separator_enabled = true;

  /// Chunks overlap by half.
  int chunk_hop() const { return chunk_size > 1 ? chunk_size / 2 : 1; }

  /// Throws ModelError naming the offending field.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

struct LstmParams {
  Tensor w_ih;  // in x 4H, gate order i, f, g, o
  Tensor w_hh;  // H x 4H
  Tensor bias;  // 1 x 4H
};

/// Bidirectional recurrent pass followed by a 2H -> F projection.
struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;
  Tensor proj;       // 2H x F
  Tensor proj_bias;  // 1 x F
};

struct DualPathBlockParams {
  BiLstmParams intra;
  BiLstmParams inter;
};

struct NamedParam {
  std::string name;
  Tensor tensor;
};

struct ModelParams {
  Tensor U;  // N x L encoder bases
  Tensor V;  // N x L decoder bases, shared by all three outputs
  Tensor bottleneck;       // N x F
  Tensor bottleneck_bias;  // 1 x F
  std::vector<DualPathBlockParams> blocks;
  Tensor output;       // F x 3N, column n*3 + c is component c of basis n
  Tensor output_bias;  // 1 x 3N

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) draws from `seed`.
  static ModelParams init(const ModelConfig& config, std::uint64_t seed);

  /// Every trainable tensor with a stable dotted name, in a fixed order.
  std::vector<NamedParam> named() const;
  std::vector<Tensor> list() const;
  /// The tensors that receive gradients under `config`: everything, or only
  /// the bases when the separator is disabled.
  std::vector<Tensor> trainable(const ModelConfig& config) const;
  std::size_t parameter_count() const;
  bool initialized() const { return U.defined(); }
};

/// Frames as columns: column k holds samples [k S, k S + L). The series is
/// right-padded with zeros when needed so every sample is covered.
Tensor frame(std::span<const double> series, int L, int S);
int frame_count(int P, int L, int S);

/// Inverse of frame(): sums each timestamp's contributions, divides by the
/// contribution count and drops padding.
std::vector<double> overlap_add(const Tensor& frames, int S, int P);

/// E = U X, with X of shape L x K.
Tensor encode(const Tensor& X, const Tensor& U);

struct MaskSet {
  Tensor trend;  // N x K each
  Tensor seasonal;
  Tensor remainder;
};

MaskSet separate(const Tensor& E, const ModelParams& params, const ModelConfig& config);

struct MaskedEncoding {
  Tensor trend;
  Tensor seasonal;
  Tensor remainder;
};

MaskedEncoding apply_masks(const Tensor& E, const MaskSet& masks);

/// Frames E_c^T V (K x L), overlap-added to length P.
std::vector<double> decode(const Tensor& E_c, const Tensor& V, int S, int P);

struct Decomposition {
  std::vector<double> trend;
  std::vector<double> seasonal;
  std::vector<double> remainder;
};

Decomposition decompose(std::span<const double> series, const ModelParams& params,
                        const ModelConfig& config);

/// Differentiable forward over a batch of equal-length univariate blocks.
/// `blocks` is B x P; each output is B x P.
struct BatchDecomposition {
  Tensor trend;
  Tensor seasonal;
  Tensor remainder;
};

BatchDecomposition forward(const Tensor& blocks, const ModelParams& params,
                           const ModelConfig& config);

}  // namespace decompad
