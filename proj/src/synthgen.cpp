#include "decompad/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "decompad/config.hpp"
#include "decompad/io/csv.hpp"
#include "json.hpp"

namespace decompad::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform(Rng& rng, Range r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

int uniform_int(Rng& rng, IntRange r) {
  return std::uniform_int_distribution<int>(r.lo, r.hi)(rng);
}

double coin_sign(Rng& rng) {
  return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double std_of(std::span<const double> x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

double median_of(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

double interpolate(std::span<const double> x, double pos) {
  pos = std::clamp(pos, 0.0, static_cast<double>(x.size() - 1));
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= x.size()) return x.back();
  const double frac = pos - static_cast<double>(i);
  return x[i] + frac * (x[i + 1] - x[i]);
}

Series resample_linear(std::span<const double> x, std::size_t new_length) {
  Series out(new_length);
  if (new_length == 1) {
    out[0] = x[0];
    return out;
  }
  const double step = static_cast<double>(x.size() - 1) / static_cast<double>(new_length - 1);
  for (std::size_t i = 0; i < new_length; ++i) out[i] = interpolate(x, static_cast<double>(i) * step);
  return out;
}

// Constant inputs (e.g. a zero-slope linear trend) standardize to zero.
Series standardize_or_zero(std::span<const double> x) {
  if (std_of(x) == 0.0) return Series(x.size(), 0.0);
  return standardize(x);
}

void check_range(const char* name, Range r) {
  if (!(r.lo <= r.hi)) {
    throw SynthError(std::string(name) + ": empty range (lo > hi)");
  }
}

void check_range(const char* name, IntRange r) {
  if (r.lo > r.hi) throw SynthError(std::string(name) + ": empty range (lo > hi)");
}

}  // namespace

std::string to_string(TrendMode mode) {
  switch (mode) {
    case TrendMode::kDeterministic: return "deterministic";
    case TrendMode::kStochastic: return "stochastic";
    case TrendMode::kMixed: return "mixed";
  }
  return "?";
}

std::string to_string(SeasonalMode mode) {
  switch (mode) {
    case SeasonalMode::kSinusoid: return "sinusoid";
    case SeasonalMode::kSquare: return "square";
    case SeasonalMode::kStochasticCycle: return "stochastic_cycle";
    case SeasonalMode::kMixed: return "mixed";
  }
  return "?";
}

std::string to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kGlobal: return "global";
    case AnomalyKind::kContextual: return "contextual";
    case AnomalyKind::kShapelet: return "shapelet";
    case AnomalyKind::kSeasonal: return "seasonal";
    case AnomalyKind::kTrend: return "trend";
  }
  return "?";
}

TrendMode parse_trend_mode(const std::string& name) {
  for (auto m : {TrendMode::kDeterministic, TrendMode::kStochastic, TrendMode::kMixed}) {
    if (to_string(m) == name) return m;
  }
  throw SynthError("unknown trend mode '" + name + "'");
}

SeasonalMode parse_seasonal_mode(const std::string& name) {
  for (auto m : {SeasonalMode::kSinusoid, SeasonalMode::kSquare,
                 SeasonalMode::kStochasticCycle, SeasonalMode::kMixed}) {
    if (to_string(m) == name) return m;
  }
  throw SynthError("unknown seasonal mode '" + name + "'");
}

AnomalyKind parse_anomaly_kind(const std::string& name) {
  for (auto k : all_anomaly_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw SynthError("unknown anomaly kind '" + name + "'");
}

void SynthConfig::validate() const {
  if (series_count < 1) throw SynthError("series_count: must be >= 1");
  if (length < 4) throw SynthError("length: must be >= 4");
  check_range("beta0", beta0);
  check_range("beta1", beta1);
  if (!(trend_noise_sigma > 0.0)) throw SynthError("trend_noise_sigma: must be > 0");
  check_range("trend_scale", trend_scale);
  check_range("period", period);
  if (period.lo <= 1 || period.hi >= length) {
    throw SynthError("period: must lie within (1, length)");
  }
  check_range("phase", phase);
  if (phase.lo < 0) throw SynthError("phase: must be >= 0");
  check_range("amplitude", amplitude);
  check_range("wave_count", wave_count);
  if (wave_count.lo < 1) throw SynthError("wave_count: must be >= 1");
  check_range("seasonal_scale", seasonal_scale);
  check_range("jitter_scale", jitter_scale);
  if (length_jitter_fraction < 0.0 || length_jitter_fraction >= 1.0) {
    throw SynthError("length_jitter_fraction: must lie in [0, 1)");
  }
  check_range("remainder_sigma", remainder_sigma);
  if (remainder_sigma.lo < 0.0) throw SynthError("remainder_sigma: must be >= 0");
  if (!(anomaly_ratio >= 0.0 && anomaly_ratio <= 1.0)) {
    throw SynthError("anomaly_ratio: must lie in [0, 1]");
  }
  check_range("events_per_series", events_per_series);
  if (events_per_series.lo < 1) throw SynthError("events_per_series: must be >= 1");
  if (anomaly_ratio > 0.0 && anomaly_kinds.empty()) {
    throw SynthError("anomaly_kinds: must be nonempty when anomaly_ratio > 0");
  }
  check_range("anomaly.global_k", anomaly.global_k);
  check_range("anomaly.contextual_k", anomaly.contextual_k);
  check_range("anomaly.trend_slope_factor", anomaly.trend_slope_factor);
  check_range("anomaly.window_length", anomaly.window_length);
  if (anomaly.window_length.lo < 2) throw SynthError("anomaly.window_length: must be >= 2");
  if (anomaly.seasonal_frequency_scales.empty()) {
    throw SynthError("anomaly.seasonal_frequency_scales: must be nonempty");
  }
  for (double f : anomaly.seasonal_frequency_scales) {
    if (!(f > 0.0)) throw SynthError("anomaly.seasonal_frequency_scales: must be > 0");
  }
  if (anomaly.shapelet_smoothing < 1) throw SynthError("anomaly.shapelet_smoothing: must be >= 1");
}

void ComponentSet::check_aligned() const {
  const std::size_t n = trend.size();
  if (seasonal.size() != n || remainder.size() != n || anomaly_mask.size() != n) {
    throw SynthError("components: lengths differ (trend " + std::to_string(n) +
                     ", seasonal " + std::to_string(seasonal.size()) + ", remainder " +
                     std::to_string(remainder.size()) + ", mask " +
                     std::to_string(anomaly_mask.size()) + ")");
  }
}

// --- trend -----------------------------------------------------------------

Series gen_linear_trend(double beta0, double beta1, int length) {
  if (length < 1) throw SynthError("gen_linear_trend: length must be >= 1");
  Series out(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) out[t] = beta0 + beta1 * static_cast<double>(t);
  return out;
}

Series integrate_twice(std::span<const double> innovations) {
  Series out(innovations.size());
  double velocity = 0.0, level = 0.0;
  for (std::size_t t = 0; t < innovations.size(); ++t) {
    velocity += innovations[t];
    level += velocity;
    out[t] = level;
  }
  return out;
}

StochasticTrend gen_stochastic_trend(int length, double sigma, Rng& rng) {
  if (length < 1) throw SynthError("gen_stochastic_trend: length must be >= 1");
  if (!(sigma > 0.0)) throw SynthError("gen_stochastic_trend: sigma must be > 0");
  std::normal_distribution<double> normal(0.0, sigma);
  StochasticTrend draw;
  draw.innovations.resize(static_cast<std::size_t>(length));
  for (auto& x : draw.innovations) x = std::ldexp(std::nearbyint(std::ldexp(normal(rng), 24)), -24);
  draw.trend = integrate_twice(draw.innovations);
  return draw;
}

// --- seasonal --------------------------------------------------------------

Series gen_deterministic_seasonal(std::span<const Wave> waves, int length) {
  if (waves.empty()) throw SynthError("gen_deterministic_seasonal: no waves configured");
  if (length < 1) throw SynthError("gen_deterministic_seasonal: length must be >= 1");
  Series out(static_cast<std::size_t>(length), 0.0);
  for (const auto& w : waves) {
    if (!(w.period > 0.0)) throw SynthError("gen_deterministic_seasonal: period must be > 0");
    for (int t = 0; t < length; ++t) {
      const double angle = kTwoPi * static_cast<double>(t) / w.period + w.phase;
      if (w.shape == WaveShape::kSine) {
        out[t] += w.amplitude * std::sin(angle);
      } else {
        const double cycle_pos = angle / kTwoPi - std::floor(angle / kTwoPi);
        out[t] += cycle_pos < 0.5 ? w.amplitude : -w.amplitude;
      }
    }
  }
  return out;
}

Series tile_cycle(std::span<const double> cycle, int phase, int length,
                  const CycleJitter& jitter, Rng& rng) {
  const auto period = static_cast<int>(cycle.size());
  if (period < 1) throw SynthError("tile_cycle: empty cycle");
  if (length < 1) throw SynthError("tile_cycle: length must be >= 1");
  auto base_at = [&](long t) {
    const long idx = ((t + phase) % period + period) % period;
    return cycle[static_cast<std::size_t>(idx)];
  };
  Series out;
  out.reserve(static_cast<std::size_t>(length));
  if (!jitter.amplitude && !jitter.length) {
    for (int t = 0; t < length; ++t) out.push_back(base_at(t));
    return out;
  }
  for (long start = 0; static_cast<int>(out.size()) < length; start += period) {
    Series one(static_cast<std::size_t>(period));
    for (int i = 0; i < period; ++i) one[i] = base_at(start + i);
    if (jitter.amplitude) {
      const double a = uniform(rng, jitter.amplitude_scale);
      for (double& v : one) v *= a;
    }
    if (jitter.length && period >= 2) {
      const double u = uniform(rng, {-jitter.length_fraction, jitter.length_fraction});
      const auto new_len = static_cast<std::size_t>(
          std::max(2L, std::lround(static_cast<double>(period) * (1.0 + u))));
      one = resample_linear(one, new_len);
    }
    for (double v : one) {
      if (static_cast<int>(out.size()) == length) break;
      out.push_back(v);
    }
  }
  return out;
}

StochasticSeasonal gen_stochastic_seasonal(int period, int phase, int length,
                                           Rng& rng, const CycleJitter& jitter) {
  if (period <= 1 || period >= length) {
    throw SynthError("gen_stochastic_seasonal: period " + std::to_string(period) +
                     " outside (1, " + std::to_string(length) + ")");
  }
  // One extra sample so the segment can be bridged: subtracting the chord
  // makes the cycle end where the next one starts.
  auto draw = gen_stochastic_trend(period + 1, 1.0, rng);
  const double drift = draw.trend[period] - draw.trend[0];
  Series segment(static_cast<std::size_t>(period));
  for (int i = 0; i < period; ++i) {
    segment[i] = draw.trend[i] - drift * static_cast<double>(i) / static_cast<double>(period);
  }
  StochasticSeasonal out;
  out.cycle = standardize_or_zero(segment);
  out.seasonal = tile_cycle(out.cycle, phase, length, jitter, rng);
  return out;
}

// --- remainder & helpers ----------------------------------------------------

Series gen_remainder(int length, double sigma, Rng& rng) {
  if (length < 1) throw SynthError("gen_remainder: length must be >= 1");
  if (sigma < 0.0) throw SynthError("gen_remainder: sigma must be >= 0");
  Series out(static_cast<std::size_t>(length), 0.0);
  if (sigma == 0.0) return out;
  std::normal_distribution<double> normal(0.0, sigma);
  for (auto& v : out) v = normal(rng);
  return out;
}

Series standardize(std::span<const double> series) {
  if (series.size() < 2) throw SynthError("standardize: need at least 2 samples");
  const double m = mean_of(series);
  const double s = std_of(series);
  if (!(s > 0.0)) throw SynthError("standardize: degenerate (zero) variance");
  Series out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - m) / s;
  return out;
}

Series compose_series(const ComponentSet& c) {
  if (c.seasonal.size() != c.trend.size() || c.remainder.size() != c.trend.size()) {
    throw SynthError("compose_series: component lengths differ");
  }
  Series out(c.trend.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = c.trend[t] + c.seasonal[t] + c.remainder[t];
  return out;
}

// --- anomalies --------------------------------------------------------------

ComponentSet inject_anomaly(ComponentSet c, const Injection& inj,
                            const AnomalyParams& params, Rng& rng) {
  c.check_aligned();
  const std::size_t n = c.length();
  const auto [begin, end] = inj.window;
  if (begin >= end || end > n) {
    throw SynthError("inject_anomaly: window [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") outside series of length " +
                     std::to_string(n));
  }
  const ComponentSet before = c;

  switch (inj.kind) {
    case AnomalyKind::kGlobal: {
      const double med = median_of(before.remainder);
      const double unit = std::max(std_of(before.remainder), params.point_scale_floor);
      for (std::size_t t = begin; t < end; ++t) {
        c.remainder[t] = med + inj.sign * inj.magnitude * unit;
      }
      break;
    }
    case AnomalyKind::kContextual: {
      const double unit = std::max(std_of(before.remainder), params.point_scale_floor);
      for (std::size_t t = begin; t < end; ++t) c.remainder[t] += inj.sign * inj.magnitude * unit;
      break;
    }
    case AnomalyKind::kTrend: {
      for (std::size_t t = begin; t < end; ++t) {
        c.trend[t] += inj.sign * inj.magnitude * static_cast<double>(t - begin + 1);
      }
      break;
    }
    case AnomalyKind::kSeasonal: {
      if (!(inj.magnitude > 0.0)) throw SynthError("inject_anomaly: seasonal time scale must be > 0");
      for (std::size_t t = begin; t < end; ++t) {
        const double src = static_cast<double>(begin) +
                           static_cast<double>(t - begin) * inj.magnitude;
        c.seasonal[t] = interpolate(before.seasonal, src);
      }
      break;
    }
    case AnomalyKind::kShapelet: {
      const std::size_t len = end - begin;
      const auto w = static_cast<std::size_t>(params.shapelet_smoothing);
      std::normal_distribution<double> normal(0.0, 1.0);
      Series noise(len + w - 1);
      for (auto& v : noise) v = normal(rng);
      Series smooth(len);
      for (std::size_t i = 0; i < len; ++i) {
        smooth[i] = std::accumulate(noise.begin() + i, noise.begin() + i + w, 0.0) /
                    static_cast<double>(w);
      }
      const double target_sd = std::max(std_of(before.seasonal), 1e-3);
      const double sd = std_of(smooth);
      const double centre = mean_of(std::span(before.seasonal).subspan(begin, len));
      for (std::size_t i = 0; i < len; ++i) {
        c.seasonal[begin + i] = centre + (sd > 0.0 ? smooth[i] / sd : 0.0) * target_sd;
      }
      break;
    }
  }

  for (std::size_t t = 0; t < n; ++t) {
    if (c.trend[t] != before.trend[t] || c.seasonal[t] != before.seasonal[t] ||
        c.remainder[t] != before.remainder[t]) {
      c.anomaly_mask[t] = true;
    }
  }
  return c;
}

Injection draw_injection(AnomalyKind kind, const ComponentSet& c,
                         const AnomalyParams& params, Rng& rng) {
  const auto n = static_cast<int>(c.length());
  Injection inj;
  inj.kind = kind;
  inj.sign = coin_sign(rng);
  if (kind == AnomalyKind::kGlobal || kind == AnomalyKind::kContextual) {
    const int t = std::uniform_int_distribution<int>(0, n - 1)(rng);
    inj.window = {static_cast<std::size_t>(t), static_cast<std::size_t>(t + 1)};
    inj.magnitude = uniform(rng, kind == AnomalyKind::kGlobal ? params.global_k
                                                               : params.contextual_k);
    return inj;
  }
  const int cap = std::max(2, n / 2);
  const int len = std::min(uniform_int(rng, params.window_length), cap);
  int last_start = n - len;
  if (kind == AnomalyKind::kSeasonal) {
    const auto& scales = params.seasonal_frequency_scales;
    inj.magnitude = scales[std::uniform_int_distribution<std::size_t>(0, scales.size() - 1)(rng)];
    if (inj.magnitude > 1.0) {
      // The sped-up source indices must stay inside the series.
      last_start = std::min(last_start, static_cast<int>(std::floor(
                                            (n - 1) - (len - 1) * inj.magnitude)));
      last_start = std::max(last_start, 0);
    }
  } else if (kind == AnomalyKind::kTrend) {
    double slope = 0.0;
    for (int t = 1; t < n; ++t) slope += std::abs(c.trend[t] - c.trend[t - 1]);
    slope /= static_cast<double>(n - 1);
    inj.magnitude = uniform(rng, params.trend_slope_factor) * slope + params.trend_slope_floor;
  }
  const int start = std::uniform_int_distribution<int>(0, last_start)(rng);
  inj.window = {static_cast<std::size_t>(start), static_cast<std::size_t>(start + len)};
  return inj;
}

// --- corpus -----------------------------------------------------------------

std::uint64_t series_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x5EED));
}

std::vector<bool> anomaly_assignment(const SynthConfig& config) {
  const auto n = static_cast<std::size_t>(config.series_count);
  std::vector<std::pair<std::uint64_t, std::size_t>> keys;
  for (std::size_t i = 0; i < n; ++i) {
    keys.emplace_back(splitmix64(series_seed(config.master_seed, i) ^ 0xA11A5EEDULL), i);
  }
  std::sort(keys.begin(), keys.end());
  const auto count = static_cast<std::size_t>(std::llround(config.anomaly_ratio * static_cast<double>(n)));
  std::vector<bool> out(n, false);
  for (std::size_t k = 0; k < count; ++k) out[keys[k].second] = true;
  return out;
}

SeriesSample gen_series(const SynthConfig& config, std::uint64_t seed,
                        bool with_anomalies) {
  Rng rng(seed);
  const int n = config.length;
  SeriesSample sample;
  sample.seed = seed;
  ComponentSet& c = sample.components;

  // trend
  bool stochastic = config.trend_mode == TrendMode::kStochastic;
  if (config.trend_mode == TrendMode::kMixed) stochastic = std::bernoulli_distribution(0.5)(rng);
  Series raw_trend;
  if (stochastic) {
    auto draw = gen_stochastic_trend(n, config.trend_noise_sigma, rng);
    raw_trend = draw.trend;
    sample.trace.trend_draw = std::move(draw);
  } else {
    const double b0 = uniform(rng, config.beta0);
    const double b1 = uniform(rng, config.beta1);
    raw_trend = gen_linear_trend(b0, b1, n);
  }
  c.trend = standardize_or_zero(raw_trend);
  const double trend_scale = uniform(rng, config.trend_scale);
  for (double& v : c.trend) v *= trend_scale;

  // seasonal
  SeasonalMode mode = config.seasonal_mode;
  if (mode == SeasonalMode::kMixed) {
    mode = static_cast<SeasonalMode>(std::uniform_int_distribution<int>(0, 2)(rng));
  }
  Series raw_seasonal;
  if (mode == SeasonalMode::kStochasticCycle) {
    const int period = std::min(uniform_int(rng, config.period), n - 1);
    const int phase = uniform_int(rng, config.phase) % period;
    CycleJitter jitter{config.amplitude_jitter, config.length_jitter, config.jitter_scale,
                       config.length_jitter_fraction};
    raw_seasonal = gen_stochastic_seasonal(period, phase, n, rng, jitter).seasonal;
    sample.trace.cycle_period = period;
    sample.trace.cycle_jittered = jitter.amplitude || jitter.length;
  } else {
    const int count = uniform_int(rng, config.wave_count);
    std::vector<Wave> waves;
    for (int i = 0; i < count; ++i) {
      Wave w;
      w.shape = mode == SeasonalMode::kSquare ? WaveShape::kSquare : WaveShape::kSine;
      w.amplitude = uniform(rng, config.amplitude);
      w.period = uniform(rng, {static_cast<double>(config.period.lo),
                               static_cast<double>(config.period.hi)});
      w.phase = uniform(rng, {0.0, kTwoPi});
      waves.push_back(w);
    }
    raw_seasonal = gen_deterministic_seasonal(waves, n);
  }
  c.seasonal = standardize_or_zero(raw_seasonal);
  const double seasonal_scale = uniform(rng, config.seasonal_scale);
  for (double& v : c.seasonal) v *= seasonal_scale;

  // remainder
  c.remainder = gen_remainder(n, uniform(rng, config.remainder_sigma), rng);
  c.anomaly_mask.assign(static_cast<std::size_t>(n), false);
  sample.trace.clean = c;

  if (with_anomalies && !config.anomaly_kinds.empty()) {
    const int events = uniform_int(rng, config.events_per_series);
    for (int e = 0; e < events; ++e) {
      const auto& kinds = config.anomaly_kinds;
      const auto kind = kinds[std::uniform_int_distribution<std::size_t>(0, kinds.size() - 1)(rng)];
      auto inj = draw_injection(kind, c, config.anomaly, rng);
      c = inject_anomaly(std::move(c), inj, config.anomaly, rng);
      sample.trace.injections.push_back(inj);
    }
  }
  sample.composed = compose_series(c);
  return sample;
}

std::vector<SeriesSample> gen_corpus(const SynthConfig& config) {
  config.validate();
  const auto assignment = anomaly_assignment(config);
  std::vector<SeriesSample> out;
  out.reserve(assignment.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out.push_back(gen_series(config, series_seed(config.master_seed, i), assignment[i]));
  }
  return out;
}

std::vector<std::filesystem::path> gen_dataset(const SynthConfig& config,
                                               const std::filesystem::path& dir) {
  const auto corpus = gen_corpus(config);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw io::IoError("cannot create corpus directory " + dir.string());
  }

  nlohmann::json manifest;
  manifest["format"] = "decompad-corpus";
  manifest["version"] = 1;
  manifest["config"] = config::to_json(config);
  auto& entries = manifest["series"] = nlohmann::json::array();

  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus[i];
    char name[32];
    std::snprintf(name, sizeof(name), "series_%04zu.csv", i);
    io::CsvTable table;
    table.header = {"x", "trend", "seasonal", "remainder", "label"};
    table.rows.reserve(s.composed.size());
    for (std::size_t t = 0; t < s.composed.size(); ++t) {
      table.rows.push_back({s.composed[t], s.components.trend[t], s.components.seasonal[t],
                            s.components.remainder[t],
                            s.components.anomaly_mask[t] ? 1.0 : 0.0});
    }
    const auto path = dir / name;
    io::write_csv(path, table);
    paths.push_back(path);

    nlohmann::json entry;
    entry["file"] = name;
    entry["seed"] = s.seed;
    entry["anomalous"] = !s.trace.injections.empty();
    auto& events = entry["events"] = nlohmann::json::array();
    for (const auto& inj : s.trace.injections) {
      events.push_back({{"kind", to_string(inj.kind)},
                        {"begin", inj.window.begin},
                        {"end", inj.window.end},
                        {"magnitude", inj.magnitude},
                        {"sign", inj.sign}});
    }
    entries.push_back(std::move(entry));
  }
  io::write_file_atomic(dir / "corpus_manifest.json", manifest.dump(2) + "\n");
  return paths;
}

CorpusSeries read_corpus_series(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  const int cx = table.column("x"), ct = table.column("trend"),
            cs = table.column("seasonal"), cr = table.column("remainder"),
            cl = table.column("label");
  if (cx < 0 || ct < 0 || cs < 0 || cr < 0 || cl < 0) {
    throw io::IoError(path.string() +
                      ": corpus file must have columns x,trend,seasonal,remainder,label");
  }
  CorpusSeries out;
  out.x = table.column_values(cx);
  out.components.trend = table.column_values(ct);
  out.components.seasonal = table.column_values(cs);
  out.components.remainder = table.column_values(cr);
  for (double v : table.column_values(cl)) out.components.anomaly_mask.push_back(v != 0.0);
  return out;
}

std::vector<std::filesystem::path> list_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw io::IoError("corpus directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("series_") && name.ends_with(".csv")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- detection benchmark -------------------------------------------------------

void BenchmarkConfig::validate() const {
  if (train_length < 4 || test_length < 4) {
    throw SynthError("benchmark: splits must hold at least 4 samples");
  }
  if (!(anomaly_fraction > 0.0 && anomaly_fraction < 0.5)) {
    throw SynthError("benchmark.anomaly_fraction: must lie in (0, 0.5)");
  }
  check_range("benchmark.trend_scale", trend_scale);
}

BenchmarkSplit gen_benchmark(const SynthConfig& config, const BenchmarkConfig& benchmark,
                             std::uint64_t seed) {
  benchmark.validate();
  const int train_length = benchmark.train_length;
  const int test_length = benchmark.test_length;
  SynthConfig whole = config;
  whole.length = train_length + test_length;
  whole.period.hi = std::min(whole.period.hi, train_length - 1);
  whole.trend_scale = benchmark.trend_scale;
  whole.validate();

  SeriesSample sample;
  bool inside = false;
  for (int attempt = 0; attempt < 100 && !inside; ++attempt) {
    sample = gen_series(whole, series_seed(seed, static_cast<std::uint64_t>(attempt)), false);
    const auto& x = sample.composed;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.begin() + train_length);
    const auto [tlo, thi] = std::minmax_element(x.begin() + train_length, x.end());
    inside = *tlo >= *lo && *thi <= *hi;
  }
  if (!inside) {
    throw SynthError("gen_benchmark: no draw kept the test split inside the train range; "
                     "lower benchmark.trend_scale");
  }

  BenchmarkSplit out;
  out.train = TimeSeries(static_cast<std::size_t>(train_length), 1);
  out.train.labels.assign(out.train.length, false);
  for (int t = 0; t < train_length; ++t) out.train.at(t, 0) = sample.composed[t];

  const auto cut = [&](const Series& s) {
    return Series(s.begin() + train_length, s.end());
  };
  ComponentSet test;
  test.trend = cut(sample.components.trend);
  test.seasonal = cut(sample.components.seasonal);
  test.remainder = cut(sample.components.remainder);
  test.anomaly_mask.assign(static_cast<std::size_t>(test_length), false);

  Rng rng(splitmix64(seed ^ 0xBE4C4D4ULL));
  const auto& kinds = config.anomaly_kinds;
  const auto target = static_cast<std::size_t>(benchmark.anomaly_fraction * test_length);
  std::size_t labeled = 0;
  for (std::size_t k = 0; labeled < target && k < 400 && !kinds.empty(); ++k) {
    const auto kind = kinds[k % kinds.size()];
    // Keep events apart so each forms its own labeled segment.
    for (int tries = 0; tries < 50; ++tries) {
      auto inj = draw_injection(kind, test, config.anomaly, rng);
      const std::size_t lo = inj.window.begin >= 8 ? inj.window.begin - 8 : 0;
      const std::size_t hi = std::min(inj.window.end + 8, test.length());
      bool clear = true;
      for (std::size_t t = lo; t < hi && clear; ++t) clear = !test.anomaly_mask[t];
      if (!clear) continue;
      test = inject_anomaly(std::move(test), inj, config.anomaly, rng);
      out.injections.push_back(inj);
      break;
    }
    labeled = static_cast<std::size_t>(
        std::count(test.anomaly_mask.begin(), test.anomaly_mask.end(), true));
  }

  const auto composed = compose_series(test);
  out.test = TimeSeries(static_cast<std::size_t>(test_length), 1);
  out.test.labels = test.anomaly_mask;
  for (int t = 0; t < test_length; ++t) out.test.at(t, 0) = composed[t];
  return out;
}

}  // namespace decompad::synth
