#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <set>

#include "doctest.h"

#include "decompad/config.hpp"
#include "decompad/io/csv.hpp"
#include "decompad/synthgen.hpp"

using namespace decompad::synth;
namespace fs = std::filesystem;

namespace {

double mean(const Series& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double pop_std(const Series& x) {
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

// Index of the largest DFT magnitude among bins 1..n/2 (plain O(n^2) DFT).
std::size_t dominant_bin(const Series& x) {
  const std::size_t n = x.size();
  const double m = mean(x);
  std::size_t best = 1;
  double best_mag = -1.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += (x[t] - m) * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t) / double(n));
    }
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  return best;
}

ComponentSet flat_components(std::size_t n) {
  ComponentSet c;
  c.trend.assign(n, 0.0);
  c.seasonal.assign(n, 0.0);
  c.remainder.assign(n, 0.0);
  c.anomaly_mask.assign(n, false);
  return c;
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("decompad_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("linear trend") {
  CHECK(gen_linear_trend(1, 2, 3) == Series{1, 3, 5});
  CHECK(gen_linear_trend(4, 0, 3) == Series{4, 4, 4});
  CHECK(gen_linear_trend(0, -1, 2) == Series{0, -1});
  CHECK_THROWS_AS(gen_linear_trend(0, 1, 0), SynthError);
}

TEST_CASE("stochastic trend is a double cumulative sum") {
  CHECK(integrate_twice(Series{1, 0, 0}) == Series{1, 2, 3});
  CHECK(integrate_twice(Series(5, 0.0)) == Series(5, 0.0));

  Rng rng(42);
  for (int draw = 0; draw < 20; ++draw) {
    auto st = gen_stochastic_trend(300, 0.5 + draw, rng);
    const auto& tau = st.trend;
    for (std::size_t t = 2; t < tau.size(); ++t) {
      REQUIRE(tau[t] - 2.0 * tau[t - 1] + tau[t - 2] == st.innovations[t]);
    }
  }
  CHECK_THROWS_AS(gen_stochastic_trend(10, 0.0, rng), SynthError);
}

TEST_CASE("deterministic seasonal waves") {
  std::vector<Wave> sine{{WaveShape::kSine, 1.0, 4.0, 0.0}};
  auto s = gen_deterministic_seasonal(sine, 4);
  const double expected[] = {0, 1, 0, -1};
  for (int t = 0; t < 4; ++t) CHECK(std::abs(s[t] - expected[t]) <= 1e-12);

  std::vector<Wave> square{{WaveShape::kSquare, 2.0, 2.0, 0.0}};
  auto q = gen_deterministic_seasonal(square, 6);
  CHECK(q == Series{2, -2, 2, -2, 2, -2});

  std::vector<Wave> a{{WaveShape::kSine, 0.7, 9.0, 0.3}};
  std::vector<Wave> b{{WaveShape::kSine, 1.3, 5.5, 1.1}};
  std::vector<Wave> both{a[0], b[0]};
  auto sa = gen_deterministic_seasonal(a, 50), sb = gen_deterministic_seasonal(b, 50);
  auto sab = gen_deterministic_seasonal(both, 50);
  for (int t = 0; t < 50; ++t) CHECK(sab[t] == doctest::Approx(sa[t] + sb[t]).epsilon(1e-14));

  CHECK_THROWS_AS(gen_deterministic_seasonal(std::vector<Wave>{}, 4), SynthError);
  std::vector<Wave> bad{{WaveShape::kSine, 1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(gen_deterministic_seasonal(bad, 4), SynthError);
}

TEST_CASE("stochastic seasonal tiling") {
  Rng rng(5);
  CycleJitter off;
  Series segment{3.0, 7.0};
  CHECK(tile_cycle(segment, 1, 4, off, rng) == Series{7, 3, 7, 3});

  for (int trial = 0; trial < 10; ++trial) {
    const int period = 5 + trial * 3;
    auto s = gen_stochastic_seasonal(period, trial, 400, rng, off).seasonal;
    for (std::size_t t = 0; t + period < s.size(); ++t) REQUIRE(s[t + period] == s[t]);
  }
  CHECK_THROWS_AS(gen_stochastic_seasonal(1, 0, 100, rng, off), SynthError);
  CHECK_THROWS_AS(gen_stochastic_seasonal(100, 0, 100, rng, off), SynthError);
}

TEST_CASE("amplitude jitter scales whole cycles") {
  Rng rng(8);
  CycleJitter amp;
  amp.amplitude = true;
  amp.amplitude_scale = {0.9, 1.1};
  const int period = 12;
  auto base = gen_stochastic_seasonal(period, 3, 240, rng, CycleJitter{});
  Rng rng2(99);
  auto jittered = tile_cycle(base.cycle, 3, 240, amp, rng2);
  for (int c = 0; c < 240 / period; ++c) {
    // pick the largest-magnitude sample to estimate the cycle's scalar
    int ref = c * period;
    for (int i = 0; i < period; ++i) {
      if (std::abs(base.seasonal[c * period + i]) > std::abs(base.seasonal[ref])) ref = c * period + i;
    }
    const double scale = jittered[ref] / base.seasonal[ref];
    CHECK(scale >= 0.9);
    CHECK(scale <= 1.1);
    for (int i = 0; i < period; ++i) {
      const int t = c * period + i;
      CHECK(jittered[t] == doctest::Approx(scale * base.seasonal[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("length jitter keeps the output length and varies cycles") {
  Rng rng(21);
  CycleJitter both{true, true, {0.9, 1.1}, 0.1};
  auto base = gen_stochastic_seasonal(20, 0, 400, rng, CycleJitter{});
  auto s = tile_cycle(base.cycle, 0, 400, both, rng);
  CHECK(s.size() == 400);
  bool differs = false;
  for (std::size_t t = 0; t + 20 < s.size(); ++t) differs |= s[t + 20] != s[t];
  CHECK(differs);
}

TEST_CASE("remainder white noise") {
  Rng rng(1);
  CHECK(gen_remainder(10, 0.0, rng) == Series(10, 0.0));
  auto r = gen_remainder(100000, 1.0, rng);
  CHECK(std::abs(mean(r)) <= 0.02);
  CHECK(std::abs(pop_std(r) - 1.0) <= 0.02);
  Rng a(77), b(77);
  CHECK(gen_remainder(50, 0.3, a) == gen_remainder(50, 0.3, b));
}

TEST_CASE("standardize") {
  CHECK(standardize(Series{0, 2}) == Series{-1, 1});
  Rng rng(3);
  auto x = gen_remainder(500, 2.0, rng);
  auto z = standardize(x);
  CHECK(std::abs(mean(z)) <= 1e-9);
  CHECK(std::abs(pop_std(z) - 1.0) <= 1e-9);
  auto zz = standardize(z);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(zz[i] - z[i]) <= 1e-9);
  Series affine(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) affine[i] = 3.5 * x[i] - 12.0;
  auto za = standardize(affine);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(za[i] - z[i]) <= 1e-9);
  CHECK_THROWS_AS(standardize(Series{4, 4, 4}), SynthError);
}

TEST_CASE("compose series") {
  ComponentSet one = flat_components(1);
  one.trend[0] = 1;
  one.seasonal[0] = 2;
  one.remainder[0] = 3;
  CHECK(compose_series(one) == Series{6});

  // Dyadic values keep every sum exact.
  Rng rng(4);
  ComponentSet c = flat_components(64);
  std::uniform_int_distribution<int> q(-4096, 4096);
  for (std::size_t t = 0; t < 64; ++t) {
    c.trend[t] = q(rng) / 256.0;
    c.seasonal[t] = q(rng) / 256.0;
    c.remainder[t] = q(rng) / 256.0;
  }
  auto x = compose_series(c);
  for (std::size_t t = 0; t < 64; ++t) CHECK(x[t] - c.trend[t] - c.seasonal[t] - c.remainder[t] == 0.0);

  c.seasonal.assign(64, 0.0);
  c.remainder.assign(64, 0.0);
  CHECK(compose_series(c) == c.trend);

  c.remainder.resize(10);
  CHECK_THROWS_AS(compose_series(c), SynthError);
}

TEST_CASE("global spike is far from the remainder median") {
  Rng rng(12);
  ComponentSet c = flat_components(200);
  c.remainder = gen_remainder(200, 0.5, rng);
  const Series before = c.remainder;
  AnomalyParams params;
  Injection inj{AnomalyKind::kGlobal, {50, 51}, 8.0, -1.0};
  auto out = inject_anomaly(c, inj, params, rng);
  Series sorted = before;
  std::sort(sorted.begin(), sorted.end());
  const double med = 0.5 * (sorted[99] + sorted[100]);
  CHECK(std::abs(out.remainder[50] - med) >= 8.0 * pop_std(before) - 1e-12);
  for (std::size_t t = 0; t < 200; ++t) CHECK(out.anomaly_mask[t] == (t == 50));
  CHECK(out.trend == c.trend);
  CHECK(out.seasonal == c.seasonal);
}

TEST_CASE("trend anomaly shifts the slope on the window") {
  Rng rng(2);
  ComponentSet c = flat_components(100);
  c.trend = gen_linear_trend(0.0, 0.01, 100);
  Injection inj{AnomalyKind::kTrend, {30, 45}, 0.2, 1.0};
  auto out = inject_anomaly(c, inj, AnomalyParams{}, rng);
  for (std::size_t t = 1; t < 100; ++t) {
    const double d_before = c.trend[t] - c.trend[t - 1];
    const double d_after = out.trend[t] - out.trend[t - 1];
    if (t >= 30 && t < 45) {
      CHECK(d_after - d_before == doctest::Approx(0.2).epsilon(1e-9));
    } else if (t == 45) {
      // the level returns to the clean trend right after the window
      CHECK(out.trend[t] == c.trend[t]);
    } else {
      CHECK(d_after == d_before);
    }
  }
  for (std::size_t t = 0; t < 100; ++t) CHECK(out.anomaly_mask[t] == (t >= 30 && t < 45));
}

TEST_CASE("seasonal anomaly doubles the local frequency") {
  Rng rng(6);
  const std::size_t n = 1024;
  ComponentSet c = flat_components(n);
  std::vector<Wave> w{{WaveShape::kSine, 1.0, 32.0, 0.0}};
  c.seasonal = gen_deterministic_seasonal(w, static_cast<int>(n));
  Injection inj{AnomalyKind::kSeasonal, {256, 512}, 2.0, 1.0};
  auto out = inject_anomaly(c, inj, AnomalyParams{}, rng);
  Series inside(out.seasonal.begin() + 256, out.seasonal.begin() + 512);
  Series outside(out.seasonal.begin() + 640, out.seasonal.begin() + 896);
  CHECK(dominant_bin(inside) == 2 * dominant_bin(outside));
  CHECK(out.anomaly_mask[300]);
  CHECK_FALSE(out.anomaly_mask[600]);
}

TEST_CASE("shapelet replaces the seasonal shape on the window") {
  Rng rng(31);
  ComponentSet c = flat_components(200);
  std::vector<Wave> w{{WaveShape::kSine, 1.0, 20.0, 0.0}};
  c.seasonal = gen_deterministic_seasonal(w, 200);
  auto out = inject_anomaly(c, {AnomalyKind::kShapelet, {80, 120}, 0.0, 1.0}, AnomalyParams{}, rng);
  for (std::size_t t = 0; t < 200; ++t) {
    CHECK(out.anomaly_mask[t] == (t >= 80 && t < 120));
    if (t < 80 || t >= 120) CHECK(out.seasonal[t] == c.seasonal[t]);
  }
}

TEST_CASE("injection errors") {
  Rng rng(1);
  ComponentSet c = flat_components(10);
  CHECK_THROWS_AS(inject_anomaly(c, {AnomalyKind::kGlobal, {9, 11}, 8, 1}, {}, rng), SynthError);
  CHECK_THROWS_AS(inject_anomaly(c, {AnomalyKind::kGlobal, {4, 4}, 8, 1}, {}, rng), SynthError);
  CHECK_THROWS_AS(parse_anomaly_kind("bogus"), SynthError);
}

TEST_CASE("mask marks exactly the modified timestamps across a corpus") {
  SynthConfig cfg;
  cfg.series_count = 40;
  cfg.length = 256;
  cfg.anomaly_ratio = 1.0;
  cfg.master_seed = 3;
  for (const auto& s : gen_corpus(cfg)) {
    CHECK_FALSE(s.trace.injections.empty());
    for (std::size_t t = 0; t < s.composed.size(); ++t) {
      const bool changed = s.components.trend[t] != s.trace.clean.trend[t] ||
                           s.components.seasonal[t] != s.trace.clean.seasonal[t] ||
                           s.components.remainder[t] != s.trace.clean.remainder[t];
      REQUIRE(s.components.anomaly_mask[t] == changed);
    }
  }
}

TEST_CASE("anomaly assignment counts") {
  SynthConfig cfg;
  cfg.series_count = 200;
  cfg.anomaly_ratio = 0.5;
  auto a = anomaly_assignment(cfg);
  CHECK(std::count(a.begin(), a.end(), true) == 100);
  cfg.anomaly_ratio = 0.0;
  cfg.series_count = 20;
  cfg.length = 128;
  for (const auto& s : gen_corpus(cfg)) {
    CHECK(std::none_of(s.components.anomaly_mask.begin(), s.components.anomaly_mask.end(),
                       [](bool b) { return b; }));
  }
}

TEST_CASE("corpus on disk is byte-identical across runs") {
  SynthConfig cfg;
  cfg.series_count = 4;
  cfg.length = 256;
  cfg.anomaly_ratio = 0.5;
  auto d1 = temp_dir("corpus_a"), d2 = temp_dir("corpus_b");
  auto p1 = gen_dataset(cfg, d1);
  auto p2 = gen_dataset(cfg, d2);
  REQUIRE(p1.size() == 4);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(decompad::io::read_file(p1[i]) == decompad::io::read_file(p2[i]));
  }
  CHECK(decompad::io::read_file(d1 / "corpus_manifest.json") ==
        decompad::io::read_file(d2 / "corpus_manifest.json"));

  auto back = read_corpus_series(p1[0]);
  auto again = gen_corpus(cfg)[0];
  CHECK(back.x == again.composed);
  CHECK(back.components.trend == again.components.trend);
  CHECK(back.components.anomaly_mask == again.components.anomaly_mask);
  for (std::size_t t = 0; t < back.x.size(); ++t) {
    CHECK(back.x[t] == back.components.trend[t] + back.components.seasonal[t] +
                           back.components.remainder[t]);
  }
  CHECK(list_corpus(d1).size() == 4);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("config validation names the key") {
  nlohmann::json j = {{"period", {40, 10}}};
  CHECK_THROWS_WITH_AS(decompad::config::synth_config_from_json(j), doctest::Contains("synth.period"),
                       decompad::config::ConfigError);
  nlohmann::json unknown = {{"perid", {4, 10}}};
  CHECK_THROWS_WITH_AS(decompad::config::synth_config_from_json(unknown),
                       doctest::Contains("synth.perid: unknown key"), decompad::config::ConfigError);
  nlohmann::json ratio = {{"anomaly_ratio", 1.5}};
  CHECK_THROWS_WITH_AS(decompad::config::synth_config_from_json(ratio),
                       doctest::Contains("anomaly_ratio"), decompad::config::ConfigError);
  SynthConfig cfg;
  auto round = decompad::config::synth_config_from_json(decompad::config::to_json(cfg));
  CHECK(decompad::config::to_json(round) == decompad::config::to_json(cfg));
}

TEST_CASE("benchmark splits") {
  SynthConfig cfg;
  auto b = gen_benchmark(cfg, {2048, 2048, 0.05}, 11);
  CHECK(b.train.length == 2048);
  CHECK(b.test.length == 2048);
  CHECK(std::none_of(b.train.labels.begin(), b.train.labels.end(), [](bool v) { return v; }));
  const auto positives = std::count(b.test.labels.begin(), b.test.labels.end(), true);
  CHECK(positives >= 0.05 * 2048);
  CHECK(positives <= 0.1 * 2048);
  std::set<AnomalyKind> kinds;
  for (const auto& inj : b.injections) kinds.insert(inj.kind);
  CHECK(kinds.size() == 5);
}
