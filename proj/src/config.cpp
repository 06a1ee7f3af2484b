#include "decompad/config.hpp"

#include <fstream>
#include <set>

#include "decompad/io/csv.hpp"

namespace decompad::config {

using nlohmann::json;

namespace {

// Reads typed fields out of one JSON object and rejects leftovers.
class StrictObject {
 public:
  StrictObject(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_ + ": expected an object");
  }

  std::string key(const std::string& name) const {
    return prefix_.empty() ? name : prefix_ + "." + name;
  }

  const json* find(const std::string& name) {
    seen_.insert(name);
    auto it = j_.find(name);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& name, T& out) {
    const json* v = find(name);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError(key(name) + ": expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError(key(name) + ": expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError(key(name) + ": expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError(key(name) + ": expected a string");
      }
      out = v->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(key(name) + ": " + e.what());
    }
  }

  void read(const std::string& name, synth::Range& out) {
    const json* v = find(name);
    if (v == nullptr) return;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
      throw ConfigError(key(name) + ": expected [lo, hi]");
    }
    out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    if (out.lo > out.hi) throw ConfigError(key(name) + ": empty range (lo > hi)");
  }

  void read(const std::string& name, synth::IntRange& out) {
    const json* v = find(name);
    if (v == nullptr) return;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() ||
        !(*v)[1].is_number_integer()) {
      throw ConfigError(key(name) + ": expected [lo, hi] integers");
    }
    out = {(*v)[0].get<int>(), (*v)[1].get<int>()};
    if (out.lo > out.hi) throw ConfigError(key(name) + ": empty range (lo > hi)");
  }

  template <typename Parse, typename T>
  void read_enum(const std::string& name, T& out, Parse parse) {
    std::string text;
    read(name, text);
    if (text.empty()) return;
    try {
      out = parse(text);
    } catch (const std::exception& e) {
      throw ConfigError(key(name) + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

json range_json(synth::Range r) { return json::array({r.lo, r.hi}); }
json range_json(synth::IntRange r) { return json::array({r.lo, r.hi}); }

}  // namespace

json to_json(const synth::SynthConfig& c) {
  json kinds = json::array();
  for (auto k : c.anomaly_kinds) kinds.push_back(synth::to_string(k));
  json scales = c.anomaly.seasonal_frequency_scales;
  return {
      {"series_count", c.series_count},
      {"length", c.length},
      {"master_seed", c.master_seed},
      {"trend_mode", synth::to_string(c.trend_mode)},
      {"beta0", range_json(c.beta0)},
      {"beta1", range_json(c.beta1)},
      {"trend_noise_sigma", c.trend_noise_sigma},
      {"trend_scale", range_json(c.trend_scale)},
      {"seasonal_mode", synth::to_string(c.seasonal_mode)},
      {"period", range_json(c.period)},
      {"phase", range_json(c.phase)},
      {"amplitude", range_json(c.amplitude)},
      {"wave_count", range_json(c.wave_count)},
      {"seasonal_scale", range_json(c.seasonal_scale)},
      {"amplitude_jitter", c.amplitude_jitter},
      {"length_jitter", c.length_jitter},
      {"jitter_scale", range_json(c.jitter_scale)},
      {"length_jitter_fraction", c.length_jitter_fraction},
      {"remainder_sigma", range_json(c.remainder_sigma)},
      {"anomaly_ratio", c.anomaly_ratio},
      {"events_per_series", range_json(c.events_per_series)},
      {"anomaly_kinds", kinds},
      {"anomaly",
       {{"global_k", range_json(c.anomaly.global_k)},
        {"contextual_k", range_json(c.anomaly.contextual_k)},
        {"trend_slope_factor", range_json(c.anomaly.trend_slope_factor)},
        {"trend_slope_floor", c.anomaly.trend_slope_floor},
        {"seasonal_frequency_scales", scales},
        {"point_scale_floor", c.anomaly.point_scale_floor},
        {"shapelet_smoothing", c.anomaly.shapelet_smoothing},
        {"window_length", range_json(c.anomaly.window_length)}}},
  };
}

synth::SynthConfig synth_config_from_json(const json& j, const synth::SynthConfig& base,
                                          const std::string& prefix) {
  synth::SynthConfig c = base;
  StrictObject o(j, prefix);
  o.read("series_count", c.series_count);
  o.read("length", c.length);
  o.read("master_seed", c.master_seed);
  o.read_enum("trend_mode", c.trend_mode, synth::parse_trend_mode);
  o.read("beta0", c.beta0);
  o.read("beta1", c.beta1);
  o.read("trend_noise_sigma", c.trend_noise_sigma);
  o.read("trend_scale", c.trend_scale);
  o.read_enum("seasonal_mode", c.seasonal_mode, synth::parse_seasonal_mode);
  o.read("period", c.period);
  o.read("phase", c.phase);
  o.read("amplitude", c.amplitude);
  o.read("wave_count", c.wave_count);
  o.read("seasonal_scale", c.seasonal_scale);
  o.read("amplitude_jitter", c.amplitude_jitter);
  o.read("length_jitter", c.length_jitter);
  o.read("jitter_scale", c.jitter_scale);
  o.read("length_jitter_fraction", c.length_jitter_fraction);
  o.read("remainder_sigma", c.remainder_sigma);
  o.read("anomaly_ratio", c.anomaly_ratio);
  o.read("events_per_series", c.events_per_series);
  if (const json* kinds = o.find("anomaly_kinds")) {
    if (!kinds->is_array()) throw ConfigError(o.key("anomaly_kinds") + ": expected a list");
    c.anomaly_kinds.clear();
    for (const auto& k : *kinds) {
      try {
        c.anomaly_kinds.push_back(synth::parse_anomaly_kind(k.get<std::string>()));
      } catch (const std::exception& e) {
        throw ConfigError(o.key("anomaly_kinds") + ": " + e.what());
      }
    }
  }
  if (const json* a = o.find("anomaly")) {
    StrictObject ao(*a, o.key("anomaly"));
    ao.read("global_k", c.anomaly.global_k);
    ao.read("contextual_k", c.anomaly.contextual_k);
    ao.read("trend_slope_factor", c.anomaly.trend_slope_factor);
    ao.read("trend_slope_floor", c.anomaly.trend_slope_floor);
    ao.read("seasonal_frequency_scales", c.anomaly.seasonal_frequency_scales);
    ao.read("point_scale_floor", c.anomaly.point_scale_floor);
    ao.read("shapelet_smoothing", c.anomaly.shapelet_smoothing);
    ao.read("window_length", c.anomaly.window_length);
    ao.finish();
  }
  o.finish();
  try {
    c.validate();
  } catch (const synth::SynthError& e) {
    throw ConfigError(prefix + "." + e.what());
  }
  return c;
}

namespace {

template <typename Fn>
auto rethrow_as_config(const std::string& prefix, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(prefix + "." + e.what());
  }
}

}  // namespace

json to_json(const ModelConfig& c) {
  return {{"frame_length", c.frame_length}, {"stride", c.stride},
          {"basis_count", c.basis_count},   {"bottleneck_dim", c.bottleneck_dim},
          {"hidden_dim", c.hidden_dim},     {"block_count", c.block_count},
          {"chunk_size", c.chunk_size},     {"separator_enabled", c.separator_enabled}};
}

ModelConfig model_config_from_json(const json& j, const ModelConfig& base, const std::string& prefix) {
  ModelConfig c = base;
  StrictObject o(j, prefix);
  o.read("frame_length", c.frame_length);
  o.read("stride", c.stride);
  o.read("basis_count", c.basis_count);
  o.read("bottleneck_dim", c.bottleneck_dim);
  o.read("hidden_dim", c.hidden_dim);
  o.read("block_count", c.block_count);
  o.read("chunk_size", c.chunk_size);
  o.read("separator_enabled", c.separator_enabled);
  o.finish();
  rethrow_as_config(prefix, [&] { c.validate(); return 0; });
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"pretrain_lr", c.pretrain_lr},         {"pretrain_epochs", c.pretrain_epochs},
          {"finetune_lr", c.finetune_lr},         {"finetune_epochs", c.finetune_epochs},
          {"batch_size", c.batch_size},           {"block_length", c.block_length},
          {"ablation", to_string(c.ablation)}};
}

TrainConfig train_config_from_json(const json& j, const TrainConfig& base, const std::string& prefix) {
  TrainConfig c = base;
  StrictObject o(j, prefix);
  o.read("pretrain_lr", c.pretrain_lr);
  o.read("pretrain_epochs", c.pretrain_epochs);
  o.read("finetune_lr", c.finetune_lr);
  o.read("finetune_epochs", c.finetune_epochs);
  o.read("batch_size", c.batch_size);
  o.read("block_length", c.block_length);
  o.read_enum("ablation", c.ablation, parse_ablation);
  o.finish();
  return c;
}

json to_json(const PotParams& p) {
  return {{"init_quantile", p.init_quantile}, {"risk", p.risk}, {"min_excesses", p.min_excesses}};
}

PotParams pot_params_from_json(const json& j, const PotParams& base, const std::string& prefix) {
  PotParams p = base;
  StrictObject o(j, prefix);
  o.read("init_quantile", p.init_quantile);
  o.read("risk", p.risk);
  o.read("min_excesses", p.min_excesses);
  o.finish();
  rethrow_as_config(prefix, [&] { p.validate(); return 0; });
  return p;
}

void RunConfig::propagate_seed() {
  synth.master_seed = seed;
  train.seed = seed;
}

void RunConfig::validate() const {
  rethrow_as_config("synth", [&] { synth.validate(); return 0; });
  rethrow_as_config("model", [&] { model.validate(); return 0; });
  rethrow_as_config("train", [&] { train.validate(model); return 0; });
  rethrow_as_config("pot", [&] { pot.validate(); return 0; });
  try {
    benchmark.validate();
  } catch (const synth::SynthError& e) {
    throw ConfigError(e.what());
  }
  if (benchmark.train_length < train.block_length) {
    throw ConfigError("benchmark.train_length: must be >= train.block_length");
  }
}

json to_json(const RunConfig& c) {
  json synth = to_json(c.synth);
  synth.erase("master_seed");
  return {
      {"seed", c.seed},
      {"synth", synth},
      {"benchmark",
       {{"enabled", c.benchmark_enabled},
        {"train_length", c.benchmark.train_length},
        {"test_length", c.benchmark.test_length},
        {"anomaly_fraction", c.benchmark.anomaly_fraction},
        {"trend_scale", range_json(c.benchmark.trend_scale)}}},
      {"model", to_json(c.model)},
      {"train", to_json(c.train)},
      {"pot", to_json(c.pot)},
      {"score_includes_remainder", c.score_includes_remainder},
      {"paths",
       {{"corpus", c.paths.corpus.string()},
        {"train_data", c.paths.train_data.string()},
        {"test_data", c.paths.test_data.string()},
        {"run_dir", c.paths.run_dir.string()}}},
  };
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  StrictObject o(j, "");
  o.read("seed", c.seed);
  if (const json* s = o.find("synth")) {
    if (s->is_object() && s->contains("master_seed")) {
      throw ConfigError("synth.master_seed: set the top-level seed instead");
    }
    c.synth = synth_config_from_json(*s, c.synth, "synth");
  }
  if (const json* b = o.find("benchmark")) {
    StrictObject bo(*b, "benchmark");
    bo.read("enabled", c.benchmark_enabled);
    bo.read("train_length", c.benchmark.train_length);
    bo.read("test_length", c.benchmark.test_length);
    bo.read("anomaly_fraction", c.benchmark.anomaly_fraction);
    bo.read("trend_scale", c.benchmark.trend_scale);
    bo.finish();
  }
  if (const json* m = o.find("model")) c.model = model_config_from_json(*m, c.model, "model");
  if (const json* t = o.find("train")) c.train = train_config_from_json(*t, c.train, "train");
  if (const json* p = o.find("pot")) c.pot = pot_params_from_json(*p, c.pot, "pot");
  o.read("score_includes_remainder", c.score_includes_remainder);
  if (const json* p = o.find("paths")) {
    StrictObject po(*p, "paths");
    std::string corpus = c.paths.corpus.string(), train = c.paths.train_data.string(),
                test = c.paths.test_data.string(), run = c.paths.run_dir.string();
    po.read("corpus", corpus);
    po.read("train_data", train);
    po.read("test_data", test);
    po.read("run_dir", run);
    po.finish();
    c.paths = {corpus, train, test, run};
  }
  o.finish();
  c.propagate_seed();
  c.validate();
  return c;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment + ": override must look like key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t begin = 0;
  while (true) {
    const auto dot = key.find('.', begin);
    const std::string part = key.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (part.empty()) throw ConfigError(key + ": empty path segment");
    if (!node->is_object()) throw ConfigError(key + ": " + part + " is not inside an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    begin = dot + 1;
  }
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (!path.empty()) {
    const std::string text = io::read_file(path);
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": parse error at byte " + std::to_string(e.byte));
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return run_config_from_json(doc);
}

}  // namespace decompad::config
