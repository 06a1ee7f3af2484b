#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/gradcheck.hpp"

#include "decompad/numerics/ops.hpp"
#include "decompad/synthgen.hpp"
#include "decompad/training.hpp"

using namespace decompad;
namespace ops = decompad::numerics;
using decompad::testing::gradcheck;
using decompad::testing::random_tensor;

namespace {

ModelConfig small_model() {
  ModelConfig c;
  c.basis_count = 6;
  c.bottleneck_dim = 4;
  c.hidden_dim = 5;
  c.block_count = 1;
  c.chunk_size = 4;
  return c;
}

TrainConfig small_train() {
  TrainConfig t;
  t.block_length = 32;
  t.batch_size = 4;
  t.pretrain_epochs = 2;
  t.finetune_epochs = 2;
  t.seed = 3;
  return t;
}

std::vector<synth::CorpusSeries> small_corpus(int count, int length, std::uint64_t seed) {
  synth::SynthConfig sc;
  sc.series_count = count;
  sc.length = length;
  sc.period = {8, 24};
  sc.master_seed = seed;
  std::vector<synth::CorpusSeries> out;
  for (auto& s : synth::gen_corpus(sc)) out.push_back({s.composed, s.components});
  return out;
}

TimeSeries small_split(std::size_t T, std::size_t D, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 0.1);
  TimeSeries ts(T, D);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < D; ++c) {
      ts.values[t * D + c] = std::sin(0.3 * static_cast<double>(t) + static_cast<double>(c)) + d(rng);
    }
  }
  return ts;
}

Tensor row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({1, n}, std::move(v));
}

Tensor ones(std::size_t r, std::size_t c) { return Tensor::filled({r, c}, 1.0); }

double total_pretrain_loss(const ModelParams& params, const ModelConfig& model,
                           const std::vector<DecompositionBlock>& blocks, std::size_t P) {
  double total = 0.0;
  for (const auto& b : blocks) {
    std::vector<double> mask(P, 0.0);
    std::fill_n(mask.begin(), b.valid, 1.0);
    const auto out = forward(row(b.x), params, model);
    total += loss_dec({row(b.trend), row(b.seasonal), row(b.remainder)},
                      {out.trend, out.seasonal, out.remainder}, row(mask))
                 .item();
  }
  return total;
}

}  // namespace

TEST_CASE("normalization maps the train range into [0, 1)") {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0, -1.0};
  const auto y = normalize(x, 0.0, 2.0);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(y[2] < 1.0);
  CHECK(y[2] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(y[3] == 1.0 - kNormEpsilon);
  CHECK(y[4] == 0.0);

  const auto flat = normalize(std::vector<double>{5.0, 5.0}, 5.0, 5.0);
  CHECK(flat == std::vector<double>{0.0, 0.0});
}

TEST_CASE("normalization statistics come per channel") {
  TimeSeries ts(3, 2);
  ts.values = {1.0, 10.0, 3.0, 10.0, 2.0, 10.0};
  const auto stats = compute_norm_stats(ts);
  CHECK(stats.min == std::vector<double>{1.0, 10.0});
  CHECK(stats.max == std::vector<double>{3.0, 10.0});
  CHECK_FALSE(stats.degenerate(0));
  CHECK(stats.degenerate(1));
  const auto n = normalize(ts, stats);
  CHECK(n.values[0] == 0.0);
  CHECK(n.values[4] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(n.values[1] == 0.0);
  CHECK(n.values[5] == 0.0);
  CHECK_THROWS_AS(normalize(TimeSeries(3, 3), stats), TrainingError);
}

TEST_CASE("segmentation keeps the short tail with edge padding") {
  std::vector<double> x(16);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const auto full = segment(x, 8);
  REQUIRE(full.size() == 2);
  CHECK(full[0].valid == 8);
  CHECK(full[1].valid == 8);
  CHECK(full[1].start == 8);

  x.resize(10);
  const auto tail = segment(x, 8);
  REQUIRE(tail.size() == 2);
  CHECK(tail[1].valid == 2);
  CHECK(tail[1].values == std::vector<double>{8, 9, 9, 9, 9, 9, 9, 9});
  CHECK(unsegment(tail) == x);
}

TEST_CASE("unsegment restores any length exactly") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (std::size_t n : {1, 7, 8, 9, 100, 129}) {
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    for (std::size_t P : {1, 8, 128}) CHECK(unsegment(segment(x, P)) == x);
  }
}

TEST_CASE("multichannel segmentation emits one block run per channel") {
  TimeSeries ts(10, 2);
  for (std::size_t t = 0; t < 10; ++t) {
    ts.values[2 * t] = static_cast<double>(t);
    ts.values[2 * t + 1] = -static_cast<double>(t);
  }
  const auto blocks = segment(ts, 4);
  REQUIRE(blocks.size() == 6);
  CHECK(blocks[0].channel == 0);
  CHECK(blocks[3].channel == 1);
  CHECK(blocks[3].values == std::vector<double>{0, -1, -2, -3});
}

TEST_CASE("decomposition loss examples") {
  const auto z = row({0.0, 0.0});
  const auto m = ones(1, 2);
  CHECK(loss_dec({z, z, z}, {z, z, z}, m).item() == 0.0);
  CHECK(loss_dec({row({1.0, 0.0}), z, z}, {z, z, z}, m).item() == 1.0);

  const Tensor two = Tensor({2, 2}, {1.0, 0.0, 0.0, 0.0});
  const Tensor two_s = Tensor({2, 2}, {0.0, 0.0, 0.0, 1.0});
  const auto z2 = Tensor::zeros({2, 2});
  CHECK(loss_dec({two, two_s, z2}, {z2, z2, z2}, ones(2, 2)).item() == 2.0);

  // padded points do not count
  CHECK(loss_dec({row({0.0, 5.0}), z, z}, {z, z, z}, row({1.0, 0.0})).item() == 0.0);
  CHECK_THROWS(loss_dec({row({1.0, 0.0, 0.0}), z, z}, {z, z, z}, m));
}

TEST_CASE("reconstruction loss examples") {
  const auto m = ones(1, 2);
  const auto x = row({1.0, 1.0});
  CHECK(loss_rec(x, row({0.5, 0.25}), row({0.5, 0.75}), m).item() == 0.0);
  CHECK(loss_rec(x, row({0.0, 1.0}), row({0.0, 0.0}), m).item() == 1.0);
  CHECK_THROWS(loss_rec(x, row({0.0}), row({0.0}), m));
}

TEST_CASE("loss gradients match finite differences") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor mask = Tensor({2, 5}, {1, 1, 1, 1, 1, 1, 1, 1, 0, 0});
    const auto dec = gradcheck(
        [&](const std::vector<Tensor>& in) { return loss_dec({in[0], in[1], in[2]}, {in[3], in[4], in[5]}, mask); },
        {random_tensor({2, 5}, rng), random_tensor({2, 5}, rng), random_tensor({2, 5}, rng),
         random_tensor({2, 5}, rng), random_tensor({2, 5}, rng), random_tensor({2, 5}, rng)});
    CHECK(dec.max_relative_error < 1e-4);
    const auto rec = gradcheck(
        [&](const std::vector<Tensor>& in) { return loss_rec(in[0], in[1], in[2], mask); },
        {random_tensor({2, 5}, rng), random_tensor({2, 5}, rng), random_tensor({2, 5}, rng)});
    CHECK(rec.max_relative_error < 1e-4);
  }
}

TEST_CASE("pretraining blocks sum to the normalized series") {
  const auto corpus = small_corpus(1, 100, 4);
  const auto blocks = pretraining_blocks(corpus[0], 32);
  REQUIRE(blocks.size() == 4);
  CHECK(blocks[3].valid == 4);
  double lo = 1.0, hi = 0.0;
  for (const auto& b : blocks) {
    for (std::size_t t = 0; t < b.valid; ++t) {
      CHECK(b.trend[t] + b.seasonal[t] + b.remainder[t] == doctest::Approx(b.x[t]).epsilon(1e-12));
      lo = std::min(lo, b.x[t]);
      hi = std::max(hi, b.x[t]);
    }
  }
  CHECK(lo == 0.0);
  CHECK(hi < 1.0);

  synth::CorpusSeries broken = corpus[0];
  broken.components.remainder.pop_back();
  CHECK_THROWS_AS(pretraining_blocks(broken, 32), TrainingError);
}

TEST_CASE("one small step lowers the decomposition loss") {
  const auto model = small_model();
  auto corpus = small_corpus(1, 32, 21);
  const auto blocks = pretraining_blocks(corpus[0], 32);
  REQUIRE(blocks.size() == 1);
  auto params = ModelParams::init(model, 9);
  const double before = total_pretrain_loss(params, model, blocks, 32);

  TrainConfig cfg = small_train();
  cfg.pretrain_epochs = 1;
  cfg.pretrain_lr = 1e-4;
  const auto losses = pretrain(params, model, corpus, cfg);
  REQUIRE(losses.size() == 1);
  CHECK(losses[0].loss == doctest::Approx(before).epsilon(1e-12));
  const double after = total_pretrain_loss(params, model, blocks, 32);
  CHECK(after < before);
}

TEST_CASE("pretraining is deterministic under a fixed seed") {
  const auto model = small_model();
  const auto corpus = small_corpus(3, 64, 2);
  const auto cfg = small_train();
  auto a = ModelParams::init(model, 1);
  auto b = ModelParams::init(model, 1);
  const auto la = pretrain(a, model, corpus, cfg);
  const auto lb = pretrain(b, model, corpus, cfg);
  REQUIRE(la.size() == 2);
  CHECK(la[0].loss == lb[0].loss);
  CHECK(la[1].loss == lb[1].loss);
  const auto na = a.named(), nb = b.named();
  for (std::size_t i = 0; i < na.size(); ++i) {
    const auto da = na[i].tensor.data(), db = nb[i].tensor.data();
    CHECK(std::equal(da.begin(), da.end(), db.begin()));
  }
}

TEST_CASE("ablations change what pretraining does") {
  const auto model = small_model();
  const auto corpus = small_corpus(2, 64, 6);
  auto cfg = small_train();

  cfg.ablation = Ablation::kNoAugment;
  auto p = ModelParams::init(model, 1);
  const auto before = p.U.data()[0];
  CHECK(pretrain(p, model, corpus, cfg).empty());
  CHECK(p.U.data()[0] == before);

  cfg.ablation = Ablation::kNoDecomp;
  const auto rec = pretrain(p, model, corpus, cfg);
  CHECK(rec.size() == 2);

  cfg.ablation = Ablation::kNoSep;
  const auto nosep = apply_ablation(model, Ablation::kNoSep);
  CHECK_FALSE(nosep.separator_enabled);
  auto q = ModelParams::init(nosep, 1);
  const auto bottleneck = std::vector<double>(q.bottleneck.data().begin(), q.bottleneck.data().end());
  CHECK(pretrain(q, nosep, corpus, cfg).size() == 2);
  CHECK(std::equal(bottleneck.begin(), bottleneck.end(), q.bottleneck.data().begin()));

  for (auto a : {Ablation::kNone, Ablation::kNoSep, Ablation::kNoDecomp, Ablation::kNoAugment}) {
    CHECK(parse_ablation(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_ablation("no_everything"), std::invalid_argument);
}

TEST_CASE("fine-tuning lowers the reconstruction loss and keeps train statistics") {
  const auto model = small_model();
  auto cfg = small_train();
  cfg.finetune_epochs = 4;
  cfg.finetune_lr = 5e-3;
  auto params = ModelParams::init(model, 12);
  const auto train = small_split(200, 2, 4);
  const auto result = finetune(params, model, train, cfg);
  REQUIRE(result.losses.size() == 4);
  CHECK(result.losses.back().loss < result.losses.front().loss);
  CHECK(result.losses.front().phase == "finetune");
  const auto stats = compute_norm_stats(train);
  CHECK(result.stats.min == stats.min);
  CHECK(result.stats.max == stats.max);

  CHECK_THROWS_AS(finetune(params, model, TimeSeries{}, cfg), TrainingError);
}

TEST_CASE("series decomposition stitches every channel back") {
  const auto model = small_model();
  const auto params = ModelParams::init(model, 5);
  const auto train = small_split(75, 3, 9);
  const auto norm = normalize(train, compute_norm_stats(train));
  const auto dec = decompose_series(norm, params, model, 32);
  REQUIRE(dec.trend.size() == 75 * 3);
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> ch(75);
    for (std::size_t t = 0; t < 75; ++t) ch[t] = norm.values[t * 3 + c];
    const auto blocks = segment(ch, 32);
    const auto out = decompose(blocks[2].values, params, model);
    for (std::size_t t = 0; t < blocks[2].valid; ++t) {
      CHECK(dec.trend[(64 + t) * 3 + c] == doctest::Approx(out.trend[t]).epsilon(1e-12));
      CHECK(dec.seasonal[(64 + t) * 3 + c] == doctest::Approx(out.seasonal[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("training configuration is validated") {
  const auto model = small_model();
  TrainConfig t;
  CHECK_NOTHROW(t.validate(model));
  t.pretrain_lr = 0.0;
  CHECK_THROWS_AS(t.validate(model), std::invalid_argument);
  t = {};
  t.finetune_epochs = 0;
  CHECK_THROWS_AS(t.validate(model), std::invalid_argument);
  t = {};
  t.block_length = 1;
  CHECK_THROWS_AS(t.validate(model), std::invalid_argument);
}

TEST_CASE("loss log is a three-column CSV") {
  const auto path = std::filesystem::temp_directory_path() / "decompad_loss_log_test.csv";
  const std::vector<LossRecord> recs{{1, "pretrain", 0.5}, {1, "finetune", 0.25}};
  write_loss_log(path, recs);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().rfind("epoch,phase,loss\n1,pretrain,", 0) == 0);
  CHECK(ss.str().find("\n1,finetune,") != std::string::npos);
  std::filesystem::remove(path);
}
