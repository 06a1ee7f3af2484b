#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "decompad/model.hpp"
#include "decompad/synthgen.hpp"
#include "decompad/timeseries.hpp"

namespace decompad {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a loss stops being finite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kNormEpsilon = 1e-8;

struct NormStats {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t channels() const { return min.size(); }
  bool degenerate(std::size_t channel) const { return !(max[channel] > min[channel]); }
};

NormStats compute_norm_stats(const TimeSeries& series);

/// (x - min) / (max - min + eps), clipped to [0, 1 - eps]. A degenerate
/// range maps every value to 0.
std::vector<double> normalize(std::span<const double> x, double min, double max);
TimeSeries normalize(const TimeSeries& series, const NormStats& stats);

struct Block {
  std::size_t channel = 0;
  std::size_t start = 0;
  std::size_t valid = 0;       // leading samples that belong to the series
  std::vector<double> values;  // length P, edge-replicated past `valid`
};

/// Non-overlapping length-P blocks of one channel. The last block is kept and
/// padded by repeating its final sample.
std::vector<Block> segment(std::span<const double> series, std::size_t P, std::size_t channel = 0);
std::vector<Block> segment(const TimeSeries& series, std::size_t P);

/// Concatenates the valid parts of a channel's blocks.
std::vector<double> unsegment(std::span<const Block> blocks);

enum class Ablation { kNone, kNoSep, kNoDecomp, kNoAugment };
std::string to_string(Ablation ablation);
Ablation parse_ablation(const std::string& name);

/// Model configuration with the separator switched off for kNoSep.
ModelConfig apply_ablation(ModelConfig config, Ablation ablation);

struct TrainConfig {
  double pretrain_lr = 1e-3;
  int pretrain_epochs = 50;
  double finetune_lr = 5e-4;
  int finetune_epochs = 15;
  int batch_size = 8;
  int block_length = 128;  // P
  std::uint64_t seed = 7;
  Ablation ablation = Ablation::kNone;

  void validate(const ModelConfig& model) const;
};

// --- losses --------------------------------------------------------------

/// Tensors of shape B x P; `mask` holds 1 on valid points and 0 on padding.
struct ComponentTensors {
  Tensor trend;
  Tensor seasonal;
  Tensor remainder;
};

/// Sum over blocks (channels) of the three squared-L2 component errors.
Tensor loss_dec(const ComponentTensors& truth, const ComponentTensors& predicted, const Tensor& mask);

/// Sum over blocks of ||x - (trend + seasonal)||^2. The remainder is not used.
Tensor loss_rec(const Tensor& x, const Tensor& trend, const Tensor& seasonal, const Tensor& mask);

// --- optimization --------------------------------------------------------

struct LossRecord {
  int epoch = 0;  // 1-based
  std::string phase;
  double loss = 0.0;  // mean per block
};

using EpochCallback = std::function<void(const LossRecord&)>;

/// One pretraining example, already normalized.
struct DecompositionBlock {
  std::vector<double> x;
  std::vector<double> trend;
  std::vector<double> seasonal;
  std::vector<double> remainder;
  std::size_t valid = 0;
};

/// Scales a corpus series into [0,1) by its own range: the offset goes to the
/// trend and every component is divided by the range, so the parts still sum
/// to the normalized series. Then cuts it into length-P blocks.
std::vector<DecompositionBlock> pretraining_blocks(const synth::CorpusSeries& series, std::size_t P);

/// Minimizes loss_dec (loss_rec under kNoDecomp) with ADAM over shuffled
/// batches. Returns the per-epoch mean block loss. kNoAugment is a no-op.
std::vector<LossRecord> pretrain(ModelParams& params, const ModelConfig& model,
                                 std::span<const synth::CorpusSeries> corpus,
                                 const TrainConfig& config, const EpochCallback& on_epoch = {});

struct FinetuneResult {
  NormStats stats;
  std::vector<LossRecord> losses;
};

/// Minimizes loss_rec on the normalized, segmented training split.
FinetuneResult finetune(ModelParams& params, const ModelConfig& model, const TimeSeries& train,
                        const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Reconstructed components of every channel of a normalized series.
struct SeriesDecomposition {
  std::size_t length = 0;
  std::size_t channels = 0;
  std::vector<double> trend;  // row-major T x D like TimeSeries::values
  std::vector<double> seasonal;
  std::vector<double> remainder;
};

/// Segments each channel, decomposes every block and stitches the valid
/// parts back together.
SeriesDecomposition decompose_series(const TimeSeries& normalized, const ModelParams& params,
                                     const ModelConfig& model, std::size_t P);

void write_loss_log(const std::filesystem::path& path, std::span<const LossRecord> records);

}  // namespace decompad
