#include "cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>

#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "decompad/checkpoint.hpp"
#include "decompad/config.hpp"
#include "decompad/detection.hpp"
#include "decompad/io/csv.hpp"
#include "decompad/training.hpp"

namespace decompad::cli {

namespace {

void configure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("decompad");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  });
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv(kLogLevelEnv)) spdlog::cfg::helpers::load_levels(level);
}

int fail(ExitCode code, const std::string& message) {
  spdlog::error("{}", message);
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  configure_logging();

  CLI::App app{"Seasonal-trend decomposition network for time-series anomaly detection", "decompad"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::filesystem::path config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration (defaults apply when omitted)");
    sub->add_option("--set", overrides, "Override a config value: dotted.key=value (repeatable)")
        ->allow_extra_args(false);
  };

  auto* synth = app.add_subcommand("synth", "Write the synthetic pretraining corpus and the detection benchmark");
  add_config(synth);

  auto* train = app.add_subcommand("train", "Pretrain on the corpus and/or fine-tune on the target train split");
  add_config(train);
  std::string phase = "both";
  std::string ablation;
  train->add_option("--phase", phase, "pretrain, finetune or both")
      ->check(CLI::IsMember({"pretrain", "finetune", "both"}));
  train->add_option("--ablation", ablation, "none, no_sep, no_decomp or no_augment")
      ->check(CLI::IsMember({"none", "no_sep", "no_decomp", "no_augment"}));

  auto* detect = app.add_subcommand("detect", "Score a series, calibrate the threshold and label anomalies");
  add_config(detect);
  DetectOptions detect_options;
  detect->add_option("--checkpoint", detect_options.checkpoint, "Fine-tuned checkpoint (default <run_dir>/checkpoint.json)");
  detect->add_option("--data", detect_options.data, "Series to score (default paths.test_data)");
  detect->add_option("--calibration", detect_options.calibration,
                     "Anomaly-free series the threshold is fit on (default paths.train_data)");
  detect->add_option("--labels", detect_options.labels, "CSV with a label column; enables the metrics report");
  detect->add_option("--out", detect_options.out_dir, "Output directory (default paths.run_dir)");

  auto* report = app.add_subcommand("report", "Render SVG plots and an index page for a detect run");
  std::filesystem::path report_dir;
  report->add_option("run_dir", report_dir, "Directory holding the detect outputs")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, std::cout, std::cerr);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, std::cout, std::cerr);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cout, std::cerr);
    return kValidation;
  }

  const nlohmann::json echo = args;
  try {
    if (report->parsed()) {
      cmd_report(report_dir, echo);
      return kSuccess;
    }
    const auto config = config::load_run_config(config_path, overrides);
    if (synth->parsed()) {
      cmd_synth(config, echo);
    } else if (train->parsed()) {
      TrainOptions options;
      options.phase = parse_phase(phase);
      if (!ablation.empty()) options.ablation = parse_ablation(ablation);
      cmd_train(config, options, echo);
    } else if (detect->parsed()) {
      cmd_detect(config, detect_options, echo);
    }
    return kSuccess;
  } catch (const NumericError& e) {
    return fail(kNumericFailure, e.what());
  } catch (const io::IoError& e) {
    return fail(kIoFailure, e.what());
  } catch (const CheckpointError& e) {
    return fail(kIoFailure, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kIoFailure, e.what());
  } catch (const std::exception& e) {
    return fail(kValidation, e.what());
  }
}

}  // namespace decompad::cli
