#include "decompad/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "decompad/io/csv.hpp"
#include "decompad/numerics/adam.hpp"
#include "decompad/numerics/ops.hpp"

namespace decompad {

namespace ops = numerics;

// --- normalization -------------------------------------------------------

NormStats compute_norm_stats(const TimeSeries& series) {
  if (series.length == 0 || series.channels == 0) throw TrainingError("normalization: empty series");
  NormStats s;
  s.min.assign(series.channels, 0.0);
  s.max.assign(series.channels, 0.0);
  for (std::size_t d = 0; d < series.channels; ++d) {
    const auto x = series.channel(d);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    s.min[d] = *lo;
    s.max[d] = *hi;
  }
  return s;
}

std::vector<double> normalize(std::span<const double> x, double min, double max) {
  std::vector<double> out(x.size(), 0.0);
  if (!(max > min)) return out;
  const double range = max - min + kNormEpsilon;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::clamp((x[i] - min) / range, 0.0, 1.0 - kNormEpsilon);
  }
  return out;
}

TimeSeries normalize(const TimeSeries& series, const NormStats& stats) {
  if (stats.channels() != series.channels) {
    throw TrainingError("normalization statistics cover " + std::to_string(stats.channels()) +
                        " channels, data has " + std::to_string(series.channels));
  }
  TimeSeries out = series;
  for (std::size_t d = 0; d < series.channels; ++d) {
    if (stats.degenerate(d)) spdlog::warn("channel {} is constant on the training split; mapped to 0", d);
    out.set_channel(d, normalize(series.channel(d), stats.min[d], stats.max[d]));
  }
  return out;
}

// --- segmentation --------------------------------------------------------

std::vector<Block> segment(std::span<const double> series, std::size_t P, std::size_t channel) {
  if (P == 0) throw TrainingError("segment: block length must be positive");
  std::vector<Block> blocks;
  for (std::size_t start = 0; start < series.size(); start += P) {
    Block b;
    b.channel = channel;
    b.start = start;
    b.valid = std::min(P, series.size() - start);
    b.values.assign(series.begin() + start, series.begin() + start + b.valid);
    b.values.resize(P, b.values.back());
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<Block> segment(const TimeSeries& series, std::size_t P) {
  std::vector<Block> blocks;
  for (std::size_t d = 0; d < series.channels; ++d) {
    auto part = segment(series.channel(d), P, d);
    blocks.insert(blocks.end(), part.begin(), part.end());
  }
  return blocks;
}

std::vector<double> unsegment(std::span<const Block> blocks) {
  std::vector<double> out;
  for (const auto& b : blocks) out.insert(out.end(), b.values.begin(), b.values.begin() + b.valid);
  return out;
}

// --- configuration -------------------------------------------------------

std::string to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::kNone: return "none";
    case Ablation::kNoSep: return "no_sep";
    case Ablation::kNoDecomp: return "no_decomp";
    case Ablation::kNoAugment: return "no_augment";
  }
  return "none";
}

Ablation parse_ablation(const std::string& name) {
  for (auto a : {Ablation::kNone, Ablation::kNoSep, Ablation::kNoDecomp, Ablation::kNoAugment}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown ablation '" + name + "' (none, no_sep, no_decomp, no_augment)");
}

ModelConfig apply_ablation(ModelConfig config, Ablation ablation) {
  if (ablation == Ablation::kNoSep) config.separator_enabled = false;
  return config;
}

void TrainConfig::validate(const ModelConfig& model) const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(pretrain_lr > 0.0, "pretrain_lr: must be > 0");
  require(finetune_lr > 0.0, "finetune_lr: must be > 0");
  require(pretrain_epochs >= 1, "pretrain_epochs: must be >= 1");
  require(finetune_epochs >= 1, "finetune_epochs: must be >= 1");
  require(batch_size >= 1, "batch_size: must be >= 1");
  require(block_length >= model.frame_length, "block_length: must be >= frame_length");
}

// --- losses --------------------------------------------------------------

namespace {

Tensor masked_sse(const Tensor& a, const Tensor& b, const Tensor& mask) {
  return ops::sum_squares(ops::mul(ops::sub(a, b), mask));
}

}  // namespace

Tensor loss_dec(const ComponentTensors& truth, const ComponentTensors& predicted, const Tensor& mask) {
  return ops::add(ops::add(masked_sse(truth.trend, predicted.trend, mask),
                           masked_sse(truth.seasonal, predicted.seasonal, mask)),
                  masked_sse(truth.remainder, predicted.remainder, mask));
}

Tensor loss_rec(const Tensor& x, const Tensor& trend, const Tensor& seasonal, const Tensor& mask) {
  return masked_sse(x, ops::add(trend, seasonal), mask);
}

// --- optimization --------------------------------------------------------

namespace {

struct Batch {
  Tensor x, trend, seasonal, remainder, mask;
};

Tensor stack(std::span<const std::size_t> ids, std::size_t P,
             const std::function<const std::vector<double>&(std::size_t)>& row) {
  std::vector<double> data;
  data.reserve(ids.size() * P);
  for (auto id : ids) {
    const auto& r = row(id);
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({ids.size(), P}, std::move(data));
}

Tensor validity_mask(std::span<const std::size_t> ids, std::size_t P,
                     const std::function<std::size_t(std::size_t)>& valid) {
  std::vector<double> data(ids.size() * P, 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) std::fill_n(data.begin() + i * P, valid(ids[i]), 1.0);
  return Tensor({ids.size(), P}, std::move(data));
}

// Shared epoch loop: shuffles block ids, runs `loss_of` per batch and steps
// ADAM on the trainable parameters.
std::vector<LossRecord> optimize(ModelParams& params, const ModelConfig& model, std::size_t block_count,
                                 const TrainConfig& config, int epochs, double lr, const std::string& phase,
                                 const std::function<Tensor(std::span<const std::size_t>)>& loss_of,
                                 const EpochCallback& on_epoch) {
  if (block_count == 0) throw TrainingError(phase + ": no training blocks");
  auto trainable = params.trainable(model);
  auto state = ops::AdamState::for_params(trainable);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(block_count);
  std::iota(order.begin(), order.end(), 0);
  std::vector<LossRecord> records;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < block_count; begin += config.batch_size) {
      const std::size_t end = std::min(block_count, begin + static_cast<std::size_t>(config.batch_size));
      std::span<const std::size_t> ids(order.data() + begin, end - begin);
      ops::Tape tape;
      auto active = tape.activate();
      const Tensor loss = loss_of(ids);
      if (!std::isfinite(loss.item())) {
        throw NumericError(phase + ": non-finite loss in epoch " + std::to_string(epoch));
      }
      total += loss.item();
      tape.backward(loss);
      ops::adam_step(trainable, state, lr);
    }
    LossRecord rec{epoch, phase, total / static_cast<double>(block_count)};
    spdlog::info("{} epoch {}/{}: loss {:.6g}", phase, epoch, epochs, rec.loss);
    if (on_epoch) on_epoch(rec);
    records.push_back(rec);
  }
  return records;
}

}  // namespace

std::vector<DecompositionBlock> pretraining_blocks(const synth::CorpusSeries& series, std::size_t P) {
  const auto& c = series.components;
  const std::size_t n = series.x.size();
  if (n == 0 || c.trend.size() != n || c.seasonal.size() != n || c.remainder.size() != n) {
    throw TrainingError("pretraining series lacks aligned trend/seasonal/remainder components");
  }
  const auto [lo, hi] = std::minmax_element(series.x.begin(), series.x.end());
  const double min = *lo;
  const double range = *hi - *lo + kNormEpsilon;
  std::vector<double> x(n), trend(n), seasonal(n), remainder(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = (series.x[t] - min) / range;
    trend[t] = (c.trend[t] - min) / range;
    seasonal[t] = c.seasonal[t] / range;
    remainder[t] = c.remainder[t] / range;
  }
  auto bx = segment(x, P), bt = segment(trend, P), bs = segment(seasonal, P), br = segment(remainder, P);
  std::vector<DecompositionBlock> out;
  for (std::size_t i = 0; i < bx.size(); ++i) {
    out.push_back({std::move(bx[i].values), std::move(bt[i].values), std::move(bs[i].values),
                   std::move(br[i].values), bx[i].valid});
  }
  return out;
}

std::vector<LossRecord> pretrain(ModelParams& params, const ModelConfig& model,
                                 std::span<const synth::CorpusSeries> corpus, const TrainConfig& config,
                                 const EpochCallback& on_epoch) {
  config.validate(model);
  if (config.ablation == Ablation::kNoAugment) return {};
  if (corpus.empty()) throw TrainingError("pretrain: empty corpus");
  const std::size_t P = config.block_length;
  std::vector<DecompositionBlock> blocks;
  for (const auto& s : corpus) {
    auto part = pretraining_blocks(s, P);
    blocks.insert(blocks.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  const bool reconstruct = config.ablation == Ablation::kNoDecomp;
  auto loss_of = [&](std::span<const std::size_t> ids) {
    const Tensor x = stack(ids, P, [&](std::size_t i) -> const std::vector<double>& { return blocks[i].x; });
    const Tensor mask = validity_mask(ids, P, [&](std::size_t i) { return blocks[i].valid; });
    const auto out = forward(x, params, model);
    if (reconstruct) return loss_rec(x, out.trend, out.seasonal, mask);
    ComponentTensors truth{
        stack(ids, P, [&](std::size_t i) -> const std::vector<double>& { return blocks[i].trend; }),
        stack(ids, P, [&](std::size_t i) -> const std::vector<double>& { return blocks[i].seasonal; }),
        stack(ids, P, [&](std::size_t i) -> const std::vector<double>& { return blocks[i].remainder; })};
    return loss_dec(truth, {out.trend, out.seasonal, out.remainder}, mask);
  };
  return optimize(params, model, blocks.size(), config, config.pretrain_epochs, config.pretrain_lr, "pretrain",
                  loss_of, on_epoch);
}

FinetuneResult finetune(ModelParams& params, const ModelConfig& model, const TimeSeries& train,
                        const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate(model);
  if (train.length == 0) throw TrainingError("finetune: empty training split");
  FinetuneResult result;
  result.stats = compute_norm_stats(train);
  const auto blocks = segment(normalize(train, result.stats), config.block_length);
  const std::size_t P = config.block_length;
  auto loss_of = [&](std::span<const std::size_t> ids) {
    const Tensor x = stack(ids, P, [&](std::size_t i) -> const std::vector<double>& { return blocks[i].values; });
    const Tensor mask = validity_mask(ids, P, [&](std::size_t i) { return blocks[i].valid; });
    const auto out = forward(x, params, model);
    return loss_rec(x, out.trend, out.seasonal, mask);
  };
  result.losses = optimize(params, model, blocks.size(), config, config.finetune_epochs, config.finetune_lr,
                           "finetune", loss_of, on_epoch);
  return result;
}

SeriesDecomposition decompose_series(const TimeSeries& normalized, const ModelParams& params,
                                     const ModelConfig& model, std::size_t P) {
  constexpr std::size_t kChunk = 64;
  SeriesDecomposition out;
  out.length = normalized.length;
  out.channels = normalized.channels;
  const std::size_t n = normalized.length * normalized.channels;
  out.trend.assign(n, 0.0);
  out.seasonal.assign(n, 0.0);
  out.remainder.assign(n, 0.0);
  const auto blocks = segment(normalized, P);
  std::vector<std::size_t> ids(blocks.size());
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t begin = 0; begin < blocks.size(); begin += kChunk) {
    std::span<const std::size_t> part(ids.data() + begin, std::min(kChunk, blocks.size() - begin));
    const Tensor x = stack(part, P, [&](std::size_t i) -> const std::vector<double>& { return blocks[i].values; });
    const auto res = forward(x, params, model);
    for (std::size_t r = 0; r < part.size(); ++r) {
      const Block& b = blocks[part[r]];
      for (std::size_t t = 0; t < b.valid; ++t) {
        const std::size_t dst = (b.start + t) * out.channels + b.channel;
        out.trend[dst] = res.trend.at(r, t);
        out.seasonal[dst] = res.seasonal.at(r, t);
        out.remainder[dst] = res.remainder.at(r, t);
      }
    }
  }
  return out;
}

void write_loss_log(const std::filesystem::path& path, std::span<const LossRecord> records) {
  std::string text = "epoch,phase,loss\n";
  for (const auto& r : records) {
    text += std::to_string(r.epoch) + "," + r.phase + "," + io::format_double(r.loss) + "\n";
  }
  io::write_file_atomic(path, text);
}

}  // namespace decompad
