#include "cli/commands.hpp"

#include <algorithm>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "cli/manifest.hpp"
#include "cli/report.hpp"
#include "decompad/checkpoint.hpp"
#include "decompad/detection.hpp"
#include "decompad/evaluation.hpp"
#include "decompad/io/csv.hpp"
#include "decompad/synthgen.hpp"
#include "decompad/timeseries.hpp"

namespace decompad::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

fs::path injections_path(const fs::path& test_data) {
  return test_data.parent_path() / (test_data.stem().string() + "_injections.json");
}

void save(const fs::path& path, const Checkpoint& ck, RunManifest& manifest) {
  save_checkpoint(path, ck);
  manifest.add_output(path);
}

TimeSeries load_series(const fs::path& path, RunManifest& manifest) {
  auto ts = read_timeseries_csv(path);
  manifest.add_input(path);
  return ts;
}

struct Scored {
  TimeSeries normalized;
  SeriesDecomposition parts;
  std::vector<double> scores;
};

Scored score_series(const TimeSeries& series, const Checkpoint& ck, const config::RunConfig& c) {
  Scored s;
  s.normalized = normalize(series, *ck.norm);
  s.parts = decompose_series(s.normalized, ck.params, ck.model, static_cast<std::size_t>(c.train.block_length));
  std::vector<double> recon(s.normalized.values.size());
  for (std::size_t i = 0; i < recon.size(); ++i) {
    recon[i] = s.parts.trend[i] + s.parts.seasonal[i];
    if (c.score_includes_remainder) recon[i] += s.parts.remainder[i];
  }
  s.scores = score(s.normalized.values, recon, series.channels);
  return s;
}

std::vector<double> column(const io::CsvTable& table, const std::string& name, const fs::path& origin) {
  const int idx = table.column(name);
  if (idx < 0) throw io::IoError(origin.string() + ": missing column '" + name + "'");
  return table.column_values(static_cast<std::size_t>(idx));
}

}  // namespace

Phase parse_phase(const std::string& name) {
  if (name == "pretrain") return Phase::kPretrain;
  if (name == "finetune") return Phase::kFinetune;
  if (name == "both") return Phase::kBoth;
  throw std::invalid_argument("unknown phase '" + name + "' (pretrain, finetune, both)");
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::kPretrain: return "pretrain";
    case Phase::kFinetune: return "finetune";
    case Phase::kBoth: return "both";
  }
  return "both";
}

std::uint64_t benchmark_seed(std::uint64_t seed) { return synth::series_seed(seed, 0xbe4c4ULL); }

void cmd_synth(const config::RunConfig& c, const json& arguments) {
  RunManifest manifest("synth", config::to_json(c), arguments);
  fs::create_directories(c.paths.corpus);
  const auto files = manifest.time_stage("corpus", [&] { return synth::gen_dataset(c.synth, c.paths.corpus); });
  for (const auto& f : files) manifest.add_output(f);
  manifest.add_output(c.paths.corpus / "corpus_manifest.json");
  spdlog::info("wrote {} corpus series to {}", files.size(), c.paths.corpus.string());

  if (c.benchmark_enabled) {
    const auto split = manifest.time_stage(
        "benchmark", [&] { return synth::gen_benchmark(c.synth, c.benchmark, benchmark_seed(c.seed)); });
    ensure_parent(c.paths.train_data);
    ensure_parent(c.paths.test_data);
    write_timeseries_csv(c.paths.train_data, split.train);
    write_timeseries_csv(c.paths.test_data, split.test);
    json injections = json::array();
    for (const auto& inj : split.injections) {
      injections.push_back({{"kind", synth::to_string(inj.kind)},
                            {"begin", inj.window.begin},
                            {"end", inj.window.end},
                            {"magnitude", inj.magnitude}});
    }
    const auto inj_path = injections_path(c.paths.test_data);
    io::write_file_atomic(inj_path, injections.dump(2) + "\n");
    manifest.add_output(c.paths.train_data);
    manifest.add_output(c.paths.test_data);
    manifest.add_output(inj_path);
    spdlog::info("wrote benchmark splits {} and {}", c.paths.train_data.string(), c.paths.test_data.string());
  }
  manifest.write(c.paths.corpus / "synth_manifest.json");
}

void cmd_train(const config::RunConfig& base, const TrainOptions& options, const json& arguments) {
  config::RunConfig c = base;
  if (options.ablation) c.train.ablation = *options.ablation;
  const Ablation ablation = c.train.ablation;
  const ModelConfig model = apply_ablation(c.model, ablation);
  RunManifest manifest("train", config::to_json(c), arguments);
  fs::create_directories(c.paths.run_dir);
  const fs::path pretrained_path = c.paths.run_dir / kPretrainedCheckpoint;

  Checkpoint ck;
  ck.model = model;
  std::vector<LossRecord> records;
  const bool fresh = ablation == Ablation::kNoAugment;

  if (options.phase != Phase::kFinetune) {
    ck.params = ModelParams::init(model, c.seed);
    if (fresh) {
      spdlog::info("ablation {}: pretraining skipped", to_string(ablation));
    } else {
      const auto paths = synth::list_corpus(c.paths.corpus);
      if (paths.empty()) {
        throw io::IoError(c.paths.corpus.string() + ": no corpus series found; run `synth` first");
      }
      std::vector<synth::CorpusSeries> corpus;
      for (const auto& p : paths) {
        corpus.push_back(synth::read_corpus_series(p));
        manifest.add_input(p);
      }
      auto losses = manifest.time_stage("pretrain", [&] { return pretrain(ck.params, model, corpus, c.train); });
      records.insert(records.end(), losses.begin(), losses.end());
    }
    ck.meta = {{"phase", "pretrain"}, {"ablation", to_string(ablation)}, {"seed", c.seed}};
    save(pretrained_path, ck, manifest);
  }

  if (options.phase != Phase::kPretrain) {
    if (options.phase == Phase::kFinetune) {
      if (fresh) {
        ck.params = ModelParams::init(model, c.seed);
      } else {
        manifest.add_input(pretrained_path);
        ck = load_checkpoint(pretrained_path);
        if (!(ck.model == model)) {
          throw std::invalid_argument(pretrained_path.string() +
                                      ": checkpoint model configuration differs from model config");
        }
      }
    }
    const TimeSeries train = load_series(c.paths.train_data, manifest);
    if (train.has_labels() && std::count(train.labels.begin(), train.labels.end(), true) > 0) {
      spdlog::warn("{}: training split carries anomaly labels; they are ignored", c.paths.train_data.string());
    }
    auto result = manifest.time_stage("finetune", [&] { return finetune(ck.params, model, train, c.train); });
    records.insert(records.end(), result.losses.begin(), result.losses.end());
    ck.norm = std::move(result.stats);
    ck.meta = {{"phase", "finetune"}, {"ablation", to_string(ablation)}, {"seed", c.seed}};
    save(c.paths.run_dir / kCheckpoint, ck, manifest);
  }

  const fs::path log_path = c.paths.run_dir / kLossLog;
  write_loss_log(log_path, records);
  manifest.add_output(log_path);
  manifest.write(c.paths.run_dir / "train_manifest.json");
}

void cmd_detect(const config::RunConfig& c, const DetectOptions& options, const json& arguments) {
  const fs::path ck_path = options.checkpoint.empty() ? c.paths.run_dir / kCheckpoint : options.checkpoint;
  const fs::path data_path = options.data.empty() ? c.paths.test_data : options.data;
  const fs::path calib_path = options.calibration.empty() ? c.paths.train_data : options.calibration;
  const fs::path out = options.out_dir.empty() ? c.paths.run_dir : options.out_dir;
  RunManifest manifest("detect", config::to_json(c), arguments);

  manifest.add_input(ck_path);
  const Checkpoint ck = load_checkpoint(ck_path);
  if (!ck.norm) {
    throw std::invalid_argument(ck_path.string() +
                                ": checkpoint has no normalization statistics; run `train --phase finetune` first");
  }
  const TimeSeries data = load_series(data_path, manifest);
  const TimeSeries calib = load_series(calib_path, manifest);
  for (const auto* ts : {&data, &calib}) {
    if (ts->channels != ck.norm->channels()) {
      throw std::invalid_argument("channel count mismatch: data has " + std::to_string(ts->channels) +
                                  " channels, checkpoint statistics cover " + std::to_string(ck.norm->channels()));
    }
  }

  const Scored calibration = manifest.time_stage("score_calibration", [&] { return score_series(calib, ck, c); });
  const PotResult pot = manifest.time_stage("pot", [&] { return pot_threshold(calibration.scores, c.pot); });
  const Scored test = manifest.time_stage("score_data", [&] { return score_series(data, ck, c); });
  const auto pred = label_anomalies(test.scores, pot.threshold);
  spdlog::info("threshold {:.6g} (t0 {:.6g}, gamma {:.3f}, sigma {:.6g}); {} of {} points flagged", pot.threshold,
               pot.initial_threshold, pot.fit.gamma, pot.fit.sigma, std::count(pred.begin(), pred.end(), true),
               pred.size());

  std::vector<bool> truth;
  if (!options.labels.empty()) {
    truth = read_labels_csv(options.labels);
    manifest.add_input(options.labels);
    if (truth.size() != data.length) {
      throw std::invalid_argument(options.labels.string() + ": " + std::to_string(truth.size()) + " labels for " +
                                  std::to_string(data.length) + " timestamps");
    }
  }

  fs::create_directories(out);
  {
    io::CsvTable t{{"t", "score", "label"}, {}};
    for (std::size_t i = 0; i < test.scores.size(); ++i) {
      t.rows.push_back({static_cast<double>(i), test.scores[i], pred[i] ? 1.0 : 0.0});
    }
    io::write_csv(out / kScores, t);
    manifest.add_output(out / kScores);
  }
  {
    const json report = {{"initial_threshold", pot.initial_threshold},
                         {"threshold", pot.threshold},
                         {"gamma", pot.fit.gamma},
                         {"sigma", pot.fit.sigma},
                         {"peaks", pot.fit.peaks},
                         {"total", pot.fit.total},
                         {"log_likelihood", pot.fit.log_likelihood},
                         {"gamma_at_grid_bound", pot.fit.at_grid_bound},
                         {"init_quantile", c.pot.init_quantile},
                         {"risk", c.pot.risk},
                         {"min_excesses", c.pot.min_excesses},
                         {"score_includes_remainder", c.score_includes_remainder},
                         {"calibration_data_sha1", git_blob_sha1_file(calib_path)},
                         {"flagged", std::count(pred.begin(), pred.end(), true)}};
    io::write_file_atomic(out / kCalibration, report.dump(2) + "\n");
    manifest.add_output(out / kCalibration);
  }
  {
    io::CsvTable t;
    t.header.push_back("t");
    for (std::size_t d = 0; d < data.channels; ++d) {
      for (const char* part : {"raw", "x", "trend", "seasonal", "remainder"}) {
        t.header.push_back(std::string(part) + "_" + std::to_string(d));
      }
    }
    if (!truth.empty()) t.header.push_back("truth");
    for (std::size_t i = 0; i < data.length; ++i) {
      std::vector<double> row{static_cast<double>(i)};
      for (std::size_t d = 0; d < data.channels; ++d) {
        const std::size_t k = i * data.channels + d;
        row.insert(row.end(), {data.values[k], test.normalized.values[k], test.parts.trend[k],
                               test.parts.seasonal[k], test.parts.remainder[k]});
      }
      if (!truth.empty()) row.push_back(truth[i] ? 1.0 : 0.0);
      t.rows.push_back(std::move(row));
    }
    io::write_csv(out / kDecomposition, t);
    manifest.add_output(out / kDecomposition);
  }
  if (!truth.empty()) {
    const std::vector<std::string> names{data_path.stem().string()};
    const std::vector<std::vector<bool>> preds{pred}, truths{truth};
    const auto summary = evaluate_entities(names, preds, truths, true);
    io::write_file_atomic(out / kMetricsCsv, metrics_csv(summary));
    io::write_file_atomic(out / kMetricsTable, metrics_table(summary));
    manifest.add_output(out / kMetricsCsv);
    manifest.add_output(out / kMetricsTable);
    spdlog::info("point-adjusted precision {:.3f} recall {:.3f} F1 {:.3f}", summary.aggregate.precision,
                 summary.aggregate.recall, summary.aggregate.f1);
  }
  manifest.write(out / "detect_manifest.json");
}

void cmd_report(const fs::path& run_dir, const json& arguments) {
  RunManifest manifest("report", json::object(), arguments);
  const fs::path dec_path = run_dir / kDecomposition;
  const fs::path scores_path = run_dir / kScores;
  const fs::path calib_path = run_dir / kCalibration;
  const auto dec = io::read_csv(dec_path);
  const auto scores = io::read_csv(scores_path);
  const std::string calibration = io::read_file(calib_path);
  manifest.add_input(dec_path);
  manifest.add_input(scores_path);
  manifest.add_input(calib_path);
  double threshold = 0.0;
  try {
    threshold = json::parse(calibration).at("threshold").get<double>();
  } catch (const json::exception& e) {
    throw io::IoError(calib_path.string() + ": " + e.what());
  }
  std::string metrics;
  if (fs::exists(run_dir / kMetricsTable)) {
    metrics = io::read_file(run_dir / kMetricsTable);
    manifest.add_input(run_dir / kMetricsTable);
  }

  const auto error = column(scores, "score", scores_path);
  if (error.size() != dec.rows.size()) {
    throw io::IoError(scores_path.string() + ": length differs from " + dec_path.string());
  }
  std::vector<bool> truth;
  if (dec.column("truth") >= 0) {
    for (double v : column(dec, "truth", dec_path)) truth.push_back(v != 0.0);
  }

  const fs::path report_dir = run_dir / kReportDir;
  fs::create_directories(report_dir);
  std::vector<IndexEntry> entries;
  for (std::size_t d = 0; dec.column("raw_" + std::to_string(d)) >= 0; ++d) {
    const std::string suffix = "_" + std::to_string(d);
    SeriesPanels panels;
    panels.title = "channel " + std::to_string(d);
    panels.raw = column(dec, "raw" + suffix, dec_path);
    panels.seasonal = column(dec, "seasonal" + suffix, dec_path);
    panels.trend = column(dec, "trend" + suffix, dec_path);
    panels.error = error;
    panels.truth = truth;
    panels.threshold = threshold;
    const std::string file = "series" + suffix + ".svg";
    io::write_file_atomic(report_dir / file, render_series_svg(panels));
    manifest.add_output(report_dir / file);
    entries.push_back({file, panels.title});
  }
  if (entries.empty()) throw io::IoError(dec_path.string() + ": no raw_<d> columns");
  io::write_file_atomic(report_dir / "index.html",
                        render_index_html("Detection report: " + run_dir.filename().string(), entries, metrics,
                                          calibration));
  manifest.add_output(report_dir / "index.html");
  manifest.write(report_dir / "report_manifest.json");
}

}  // namespace decompad::cli
