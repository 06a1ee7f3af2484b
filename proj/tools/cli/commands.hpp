#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "decompad/config.hpp"
#include "decompad/training.hpp"
#include "json.hpp"

namespace decompad::cli {

enum class Phase { kPretrain, kFinetune, kBoth };
Phase parse_phase(const std::string& name);
std::string to_string(Phase phase);

/// File names inside a run directory.
inline constexpr const char* kPretrainedCheckpoint = "pretrained.json";
inline constexpr const char* kCheckpoint = "checkpoint.json";
inline constexpr const char* kLossLog = "loss_log.csv";
inline constexpr const char* kScores = "scores.csv";
inline constexpr const char* kCalibration = "calibration.json";
inline constexpr const char* kDecomposition = "decomposition.csv";
inline constexpr const char* kMetricsCsv = "metrics.csv";
inline constexpr const char* kMetricsTable = "metrics.txt";
inline constexpr const char* kReportDir = "report";

/// Seed of the detection benchmark, derived from the run seed.
std::uint64_t benchmark_seed(std::uint64_t seed);

void cmd_synth(const config::RunConfig& config, const nlohmann::json& arguments);

struct TrainOptions {
  Phase phase = Phase::kBoth;
  std::optional<Ablation> ablation;  // overrides train.ablation
};
void cmd_train(const config::RunConfig& config, const TrainOptions& options, const nlohmann::json& arguments);

struct DetectOptions {
  std::filesystem::path checkpoint;   // default <run_dir>/checkpoint.json
  std::filesystem::path data;         // default paths.test_data
  std::filesystem::path calibration;  // default paths.train_data
  std::filesystem::path labels;       // any CSV with a label column
  std::filesystem::path out_dir;      // default run_dir
};
void cmd_detect(const config::RunConfig& config, const DetectOptions& options, const nlohmann::json& arguments);

void cmd_report(const std::filesystem::path& run_dir, const nlohmann::json& arguments);

}  // namespace decompad::cli
