#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "decompad/detection.hpp"
#include "decompad/model.hpp"
#include "decompad/synthgen.hpp"
#include "decompad/training.hpp"
#include "json.hpp"

namespace decompad::config {

/// Invalid configuration value; the message starts with the dotted key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

nlohmann::json to_json(const synth::SynthConfig& config);
/// Fields absent from `j` keep their values from `base`. Unknown keys and
/// invalid values raise ConfigError naming the key under `prefix`.
synth::SynthConfig synth_config_from_json(const nlohmann::json& j,
                                          const synth::SynthConfig& base = {},
                                          const std::string& prefix = "synth");

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j, const ModelConfig& base = {},
                                   const std::string& prefix = "model");

/// The seed is not part of the serialized form; RunConfig owns it.
nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& base = {},
                                   const std::string& prefix = "train");

nlohmann::json to_json(const PotParams& params);
PotParams pot_params_from_json(const nlohmann::json& j, const PotParams& base = {},
                               const std::string& prefix = "pot");

struct RunPaths {
  std::filesystem::path corpus = "corpus";
  std::filesystem::path train_data = "corpus/benchmark/train.csv";
  std::filesystem::path test_data = "corpus/benchmark/test.csv";
  std::filesystem::path run_dir = "run";
};

/// Everything one pipeline run needs. `seed` is the single source of
/// randomness: it becomes the corpus master seed, the benchmark seed, the
/// parameter initialization seed and the batch shuffling seed.
struct RunConfig {
  std::uint64_t seed = 7;
  synth::SynthConfig synth;
  // Labeled detection benchmark written next to the corpus by `synth`.
  bool benchmark_enabled = true;
  synth::BenchmarkConfig benchmark;
  ModelConfig model;
  TrainConfig train;
  PotParams pot;
  bool score_includes_remainder = false;
  RunPaths paths;

  /// Copies `seed` into the nested configs.
  void propagate_seed();
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Applies a `dotted.key=value` override to a config JSON document. The value
/// is parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

}  // namespace decompad::config
