#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "decompad/timeseries.hpp"

namespace decompad::synth {

using Series = std::vector<double>;
using Rng = std::mt19937_64;

class SynthError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
};

enum class TrendMode { kDeterministic, kStochastic, kMixed };
enum class SeasonalMode { kSinusoid, kSquare, kStochasticCycle, kMixed };
enum class AnomalyKind { kGlobal, kContextual, kShapelet, kSeasonal, kTrend };

std::string to_string(TrendMode mode);
std::string to_string(SeasonalMode mode);
std::string to_string(AnomalyKind kind);
TrendMode parse_trend_mode(const std::string& name);
SeasonalMode parse_seasonal_mode(const std::string& name);
AnomalyKind parse_anomaly_kind(const std::string& name);

inline const std::vector<AnomalyKind>& all_anomaly_kinds() {
  static const std::vector<AnomalyKind> kinds{
      AnomalyKind::kGlobal, AnomalyKind::kContextual, AnomalyKind::kShapelet,
      AnomalyKind::kSeasonal, AnomalyKind::kTrend};
  return kinds;
}

/// Magnitudes used when anomalies are drawn at random.
struct AnomalyParams {
  Range global_k{6.0, 10.0};
  Range contextual_k{3.0, 5.0};
  Range trend_slope_factor{2.0, 5.0};
  // Added to the slope-based delta so flat trends still receive a visible ramp.
  double trend_slope_floor = 0.02;
  std::vector<double> seasonal_frequency_scales{0.5, 2.0};
  // Lower bound on the remainder scale used to size point spikes.
  double point_scale_floor = 0.1;
  int shapelet_smoothing = 5;
  // Pattern-anomaly window length in samples, capped at half the series.
  IntRange window_length{16, 64};
};

struct SynthConfig {
  int series_count = 64;
  int length = 512;
  std::uint64_t master_seed = 7;

  TrendMode trend_mode = TrendMode::kMixed;
  Range beta0{-1.0, 1.0};
  Range beta1{-0.01, 0.01};
  double trend_noise_sigma = 0.01;
  Range trend_scale{1.0, 1.0};

  SeasonalMode seasonal_mode = SeasonalMode::kMixed;
  IntRange period{8, 64};
  IntRange phase{0, 63};
  Range amplitude{0.5, 1.5};
  IntRange wave_count{1, 2};
  Range seasonal_scale{1.0, 1.0};
  bool amplitude_jitter = true;
  bool length_jitter = true;
  Range jitter_scale{0.9, 1.1};
  double length_jitter_fraction = 0.1;

  Range remainder_sigma{0.05, 0.2};

  double anomaly_ratio = 0.1;
  IntRange events_per_series{1, 3};
  std::vector<AnomalyKind> anomaly_kinds = all_anomaly_kinds();
  AnomalyParams anomaly;

  /// Throws SynthError naming the offending field.
  void validate() const;
};

/// Trend, seasonal and remainder of one channel plus the anomaly mask.
struct ComponentSet {
  Series trend;
  Series seasonal;
  Series remainder;
  std::vector<bool> anomaly_mask;

  std::size_t length() const { return trend.size(); }
  /// Throws SynthError unless all four sequences share one length.
  void check_aligned() const;
};

// --- trend ---------------------------------------------------------------

Series gen_linear_trend(double beta0, double beta1, int length);

/// Double cumulative sum: the unique sequence with tau_0 = x_0,
/// tau_1 = 2 x_0 + x_1 whose second difference equals x from index 2 on.
Series integrate_twice(std::span<const double> innovations);

struct StochasticTrend {
  Series innovations;
  Series trend;
};

/// ARIMA(0,2,0) draw. Innovations are Gaussian rounded to a 2^-24 grid so
/// that the double cumulative sum, and therefore the second-difference
/// identity, is exact in floating point.
StochasticTrend gen_stochastic_trend(int length, double sigma, Rng& rng);

// --- seasonal ------------------------------------------------------------

enum class WaveShape { kSine, kSquare };

struct Wave {
  WaveShape shape = WaveShape::kSine;
  double amplitude = 1.0;
  double period = 1.0;
  double phase = 0.0;  // radians
};

/// Sum of A sin(2 pi t / T0 + phi) and square waves A sign(sin(...)). The
/// square wave takes +A on the first half of each cycle, including the zero
/// crossing at its start.
Series gen_deterministic_seasonal(std::span<const Wave> waves, int length);

struct CycleJitter {
  bool amplitude = false;
  bool length = false;
  Range amplitude_scale{0.9, 1.1};
  double length_fraction = 0.1;
};

/// Tiles `cycle` so that s_t = cycle[(t + phase) mod T0], then applies the
/// optional per-cycle jitter (amplitude scale, then length resampling by
/// linear interpolation).
Series tile_cycle(std::span<const double> cycle, int phase, int length,
                  const CycleJitter& jitter, Rng& rng);

struct StochasticSeasonal {
  Series cycle;  // standardized base cycle of length T0
  Series seasonal;
};

StochasticSeasonal gen_stochastic_seasonal(int period, int phase, int length,
                                           Rng& rng, const CycleJitter& jitter);

// --- remainder & helpers -------------------------------------------------

Series gen_remainder(int length, double sigma, Rng& rng);

/// Zero mean, unit population variance. Throws SynthError on constant input.
Series standardize(std::span<const double> series);

Series compose_series(const ComponentSet& components);

// --- anomalies -----------------------------------------------------------

/// Half-open window [begin, end).
struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Injection {
  AnomalyKind kind = AnomalyKind::kGlobal;
  Window window;
  /// Spike size in remainder scales (global/contextual), slope delta per
  /// step (trend), or time-scale factor (seasonal). Unused for shapelets.
  double magnitude = 0.0;
  double sign = 1.0;
};

/// Realizes one anomaly inside the component it belongs to (point kinds in
/// the remainder, shapelet/seasonal in the seasonal, trend in the trend) and
/// marks every timestamp whose components changed.
ComponentSet inject_anomaly(ComponentSet components, const Injection& injection,
                            const AnomalyParams& params, Rng& rng);

/// Random window and magnitude for `kind`, sized by `params`.
Injection draw_injection(AnomalyKind kind, const ComponentSet& components,
                         const AnomalyParams& params, Rng& rng);

// --- corpus --------------------------------------------------------------

/// Diagnostics kept alongside a generated series for property checks.
struct GenerationTrace {
  std::optional<StochasticTrend> trend_draw;
  std::optional<int> cycle_period;  // set for stochastic-cycle seasonals
  bool cycle_jittered = false;
  ComponentSet clean;               // before any injection
  std::vector<Injection> injections;
};

struct SeriesSample {
  std::uint64_t seed = 0;
  ComponentSet components;
  Series composed;
  GenerationTrace trace;
};

std::uint64_t series_seed(std::uint64_t master_seed, std::uint64_t index);

/// Which series of the corpus receive anomalies: exactly
/// round(anomaly_ratio * series_count) of them, picked by hashed rank.
std::vector<bool> anomaly_assignment(const SynthConfig& config);

SeriesSample gen_series(const SynthConfig& config, std::uint64_t seed,
                        bool with_anomalies);

std::vector<SeriesSample> gen_corpus(const SynthConfig& config);

/// Writes series_XXXX.csv (x,trend,seasonal,remainder,label) for every
/// series plus corpus_manifest.json. Returns the written CSV paths.
std::vector<std::filesystem::path> gen_dataset(const SynthConfig& config,
                                               const std::filesystem::path& dir);

struct CorpusSeries {
  Series x;
  ComponentSet components;
};

/// Reads one corpus CSV back.
CorpusSeries read_corpus_series(const std::filesystem::path& path);
std::vector<std::filesystem::path> list_corpus(const std::filesystem::path& dir);

// --- detection benchmark --------------------------------------------------

struct BenchmarkConfig {
  int train_length = 4096;
  int test_length = 4096;
  double anomaly_fraction = 0.05;
  // Replaces SynthConfig::trend_scale: a long monotone trend would push the
  // test split outside the train split's range.
  Range trend_scale{0.05, 0.05};

  void validate() const;
};

struct BenchmarkSplit {
  TimeSeries train;  // anomaly-free
  TimeSeries test;   // labeled
  std::vector<Injection> injections;  // positions relative to the test split
};

/// One continuous normal process cut into an anomaly-free train split and a
/// test split carrying every anomaly kind in `config.anomaly_kinds`, with
/// injections added until roughly `anomaly_fraction` of test points are
/// labeled. The process is redrawn until the test split stays inside the
/// train split's range; SynthError after 100 failed draws.
BenchmarkSplit gen_benchmark(const SynthConfig& config, const BenchmarkConfig& benchmark,
                             std::uint64_t seed);

}  // namespace decompad::synth
