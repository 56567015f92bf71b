// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arc/bench.hpp"
#include "arc/config.hpp"
#include "arc/controller.hpp"
#include "arc/datagen.hpp"
#include "arc/errors.hpp"
#include "arc/trainee.hpp"

namespace arc {
namespace {

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App& sub, CommonFlags& flags) {
  sub.add_option("--config", flags.config_path, "Pipeline configuration file (JSON)");
  flags.seed_opt = sub.add_option("--seed", flags.seed, "Root seed, overrides the config");
}

PipelineConfig resolve_config(const CommonFlags& flags) {
  PipelineConfig config = flags.config_path.empty() ? parse_config("{}", ".") : load_config(flags.config_path);
  if (flags.seed_opt->count() > 0) config.seed = flags.seed;
  return config;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("failed writing " + path.string());
}

std::string fmt_double(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string counts_text(const std::array<std::size_t, kNumDecisions>& counts) {
  std::string s;
  for (LrDecision d : kAllDecisions) {
    if (!s.empty()) s += " ";
    s += std::string(to_string(d)) + "=" + std::to_string(counts[index_of(d)]);
  }
  return s;
}

void print_confusion(std::ostream& out, const ConfusionMatrix& cm) {
  out << "confusion (rows predicted, columns actual: decrease constant increase)\n";
  for (LrDecision p : kAllDecisions) {
    out << "  " << to_string(p);
    for (LrDecision a : kAllDecisions) out << " " << cm.counts[index_of(p)][index_of(a)];
    out << "\n";
  }
}

int cmd_generate(const PipelineConfig& c, std::ostream& out) {
  std::vector<TaskSpec> tasks;
  for (const auto& id : c.datagen.tasks) tasks.push_back(find_task(id));
  if (tasks.empty()) throw UsageError("datagen.tasks must not be empty");
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = generate_dataset(tasks, c.datagen.runs_per_task, c.seed, c.datagen.forced_n);
  write_dataset(ds, c.datagen.output);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& s : ds.summaries) {
    out << s.task_id << ": runs=" << s.runs << " diverged=" << s.diverged_runs << " samples=" << s.samples << " "
        << counts_text(s.class_counts) << "\n";
  }
  out << "samples=" << ds.samples.size() << " " << counts_text(ds.class_counts()) << " time=" << fmt_double(secs, "%.1f")
      << "s\n";
  out << "wrote " << c.datagen.output.string() << "\n";
  return 0;
}

int cmd_train(const PipelineConfig& c, bool quiet, std::ostream& out) {
  TrainConfig tc = c.controller.train;
  tc.seed = c.seed;
  tc.validate();
  const std::vector<Sample> samples = read_samples(c.controller.dataset);
  const auto start = std::chrono::steady_clock::now();
  std::string log = "epoch,train_loss,train_accuracy,val_weighted_accuracy\n";
  const TrainResult result = train_controller(samples, tc, [&](const EpochLog& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss, e.train_accuracy,
                  e.val_weighted_accuracy);
    log += buf;
    if (!quiet && (e.epoch % 25 == 0 || e.epoch + 1 == tc.epochs)) {
      out << "epoch " << e.epoch << " loss " << fmt_double(e.train_loss) << " val_wacc "
          << fmt_double(e.val_weighted_accuracy) << "\n";
    }
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_weights(c.controller.output, result.weights);
  write_text(c.controller.output.string() + ".log.csv", log);
  const Baseline base = majority_baseline(samples, result.split.validation);
  out << "samples=" << samples.size() << " train=" << result.split.train.size()
      << " validation=" << result.split.validation.size() << "\n";
  out << "best_epoch=" << result.best_epoch << " val_weighted_accuracy=" << fmt_double(result.best_val_weighted_accuracy)
      << " majority_baseline=" << fmt_double(base.weighted_accuracy) << " (" << to_string(base.decision) << ")"
      << " time=" << fmt_double(secs, "%.1f") << "s\n";
  out << "wrote " << c.controller.output.string() << "\n";
  return 0;
}

int cmd_evaluate(const PipelineConfig& c, std::ostream& out) {
  const std::vector<Sample> samples = read_samples(c.evaluate.dataset);
  const ControllerWeights weights = load_weights(c.evaluate.weights);
  std::vector<std::size_t> indices;
  if (c.evaluate.split == EvalSplit::kAll) {
    for (std::size_t i = 0; i < samples.size(); ++i) indices.push_back(i);
  } else {
    TrainConfig tc = c.controller.train;
    tc.seed = c.seed;
    const DatasetSplit split = training_split(samples.size(), tc);
    indices = c.evaluate.split == EvalSplit::kTrain ? split.train : split.validation;
  }
  if (indices.empty()) throw DataError("evaluation split is empty");
  const ConfusionMatrix cm = evaluate(weights, samples, indices);
  const Baseline base = majority_baseline(samples, indices);
  out << "split=" << to_string(c.evaluate.split) << " samples=" << indices.size() << "\n";
  out << "weighted_accuracy=" << fmt_double(weighted_accuracy(cm), "%.6f") << "\n";
  out << "majority_baseline=" << fmt_double(base.weighted_accuracy, "%.6f") << " (" << to_string(base.decision)
      << ")\n";
  print_confusion(out, cm);
  return 0;
}

int cmd_benchmark(const PipelineConfig& c, std::ostream& out) {
  const auto& b = c.benchmark;
  ExperimentGrid grid;
  grid.task_ids = b.tasks;
  grid.schedulers = b.schedulers;
  grid.lr0_values = b.lr0;
  grid.seeds = benchmark_seeds(c.seed, b.runs);
  grid.horizon = b.horizon;
  for (const auto& s : b.schedulers) {
    if (s.kind == SchedulerKind::kArc) {
      grid.weights = std::make_shared<const ControllerWeights>(load_weights(b.weights));
      break;
    }
  }
  grid.validate();
  const auto start = std::chrono::steady_clock::now();
  const BenchmarkReport report = run_grid(grid);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::filesystem::create_directories(b.output);
  write_text(b.output / "report.json", report_json(report));
  write_text(b.output / "metadata.json", metadata_json(report, utc_now()));
  emit_tables(report, b.output / "tables", b.decimals);
  emit_plots(report, b.output / "plots");
  for (const auto& task : report.task_ids) out << table_markdown(report, task, b.decimals) << "\n";
  int diverged = 0;
  for (const auto& cell : report.cells) diverged += cell.diverged_count;
  out << "cells=" << report.cells.size() << " runs=" << report.cells.size() * report.seeds.size()
      << " diverged=" << diverged << " time=" << fmt_double(secs, "%.1f") << "s\n";
  out << "wrote " << b.output.string() << "\n";
  return 0;
}

int cmd_inspect(const std::string& target, std::ostream& out) {
  const std::filesystem::path p = target;
  if (!std::filesystem::exists(p)) throw UsageError("no such file or directory: " + target);
  if (std::filesystem::is_directory(p)) {
    const auto manifest = p / kManifestFile;
    if (std::filesystem::exists(manifest)) {
      std::ifstream in(manifest, std::ios::binary);
      out << in.rdbuf();
      return 0;
    }
    const auto report = p / "report.json";
    if (std::filesystem::exists(report)) {
      std::ifstream in(p / "metadata.json", std::ios::binary);
      if (!in) throw DataError("benchmark directory without metadata.json");
      out << in.rdbuf();
      return 0;
    }
    throw UsageError("directory holds neither a dataset nor a benchmark report: " + target);
  }
  std::ifstream in(p, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::string(magic, 4) == "ARCW") {
    const ControllerWeights w = load_weights(p);
    nlohmann::ordered_json j;
    j["format"] = "arc-controller-weights";
    j["format_version"] = kWeightsFormatVersion;
    j["param_count"] = w.param_count();
    j["seed"] = w.seed;
    j["arch"] = {{"input_channels", w.arch.input_channels}, {"input_length", w.arch.input_length},
                 {"conv1_channels", w.arch.conv1_channels}, {"conv1_kernel", w.arch.conv1_kernel},
                 {"conv1_stride", w.arch.conv1_stride},     {"conv2_channels", w.arch.conv2_channels},
                 {"conv2_kernel", w.arch.conv2_kernel},     {"conv2_stride", w.arch.conv2_stride},
                 {"rnn_hidden", w.arch.rnn_hidden},         {"dense_hidden", w.arch.dense_hidden},
                 {"classes", w.arch.classes}};
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    w.for_each_block([&](const std::string& name, const nn::Matrix& m) {
      blocks.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    });
    j["blocks"] = blocks;
    out << j.dump(2) << "\n";
    return 0;
  }
  const std::vector<Sample> samples = read_samples(p);
  std::array<std::size_t, kNumDecisions> counts{};
  std::size_t corrected = 0;
  for (const auto& s : samples) {
    ++counts[index_of(s.label)];
    corrected += s.corrected ? 1 : 0;
  }
  out << "samples=" << samples.size() << " corrected=" << corrected << " " << counts_text(counts) << "\n";
  return 0;
}

int report(std::ostream& err, const char* kind, const std::exception& e, ExitCode code) {
  err << "arc: " << kind << ": " << e.what() << "\n";
  return static_cast<int>(code);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-rate controller pipeline: data generation, controller training, benchmarking", "arc"};
  app.require_subcommand(1);

  CommonFlags gen_flags, train_flags, eval_flags, bench_flags, inspect_flags;

  auto* gen = app.add_subcommand("generate-data", "Run branching training runs and write a labelled dataset");
  add_common(*gen, gen_flags);
  std::vector<std::string> gen_tasks;
  int gen_runs = 0, gen_n = 0;
  std::string gen_output;
  auto* gen_tasks_opt = gen->add_option("--tasks", gen_tasks, "Trainee task ids");
  auto* gen_runs_opt = gen->add_option("--runs-per-task", gen_runs, "Runs per task")->check(CLI::PositiveNumber);
  auto* gen_n_opt = gen->add_option("--forced-n", gen_n, "Fix the segment length")->check(CLI::Range(1, 10));
  auto* gen_out_opt = gen->add_option("--output", gen_output, "Dataset directory");

  auto* train = app.add_subcommand("train-controller", "Train the controller on a dataset");
  add_common(*train, train_flags);
  std::string train_dataset, train_output;
  int train_epochs = 0, train_batch = 0;
  double train_lr = 0, train_split = 0;
  bool train_quiet = false;
  auto* train_ds_opt = train->add_option("--dataset", train_dataset, "Dataset directory or samples file");
  auto* train_out_opt = train->add_option("--output", train_output, "Weights file to write");
  auto* train_epochs_opt = train->add_option("--epochs", train_epochs, "Training epochs")->check(CLI::PositiveNumber);
  auto* train_batch_opt = train->add_option("--batch-size", train_batch, "Batch size")->check(CLI::PositiveNumber);
  auto* train_lr_opt = train->add_option("--lr", train_lr, "Adam learning rate")->check(CLI::PositiveNumber);
  auto* train_split_opt = train->add_option("--split", train_split, "Train fraction")->check(CLI::Range(0.0, 1.0));
  train->add_flag("--quiet", train_quiet, "Only print the summary");

  auto* eval = app.add_subcommand("evaluate", "Weighted accuracy and confusion matrix of a controller");
  add_common(*eval, eval_flags);
  std::string eval_dataset, eval_weights, eval_split;
  auto* eval_ds_opt = eval->add_option("--dataset", eval_dataset, "Dataset directory or samples file");
  auto* eval_w_opt = eval->add_option("--weights", eval_weights, "Weights file");
  auto* eval_split_opt =
      eval->add_option("--split", eval_split, "all, train or validation")->check(CLI::IsMember({"all", "train", "validation"}));

  auto* bench = app.add_subcommand("benchmark", "Compare schedulers on trainee tasks");
  add_common(*bench, bench_flags);
  std::vector<std::string> bench_tasks;
  std::vector<double> bench_lr0;
  int bench_runs = 0, bench_horizon = 0, bench_decimals = 0;
  std::string bench_weights, bench_output;
  auto* bench_tasks_opt = bench->add_option("--tasks", bench_tasks, "Trainee task ids");
  auto* bench_lr0_opt = bench->add_option("--lr0", bench_lr0, "Initial learning rates");
  auto* bench_runs_opt = bench->add_option("--runs", bench_runs, "Seeds per cell")->check(CLI::PositiveNumber);
  auto* bench_h_opt = bench->add_option("--horizon", bench_horizon, "Epochs per run")->check(CLI::PositiveNumber);
  auto* bench_dec_opt = bench->add_option("--decimals", bench_decimals, "Table decimals")->check(CLI::Range(0, 12));
  auto* bench_w_opt = bench->add_option("--weights", bench_weights, "Controller weights for ARC rows");
  auto* bench_out_opt = bench->add_option("--output", bench_output, "Output directory");

  auto* inspect = app.add_subcommand("inspect", "Print a dataset manifest, weights summary or report metadata");
  add_common(*inspect, inspect_flags);
  std::string inspect_target;
  inspect->add_option("path", inspect_target, "Dataset directory, samples file, weights file or benchmark directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (gen->parsed()) {
      PipelineConfig c = resolve_config(gen_flags);
      if (gen_tasks_opt->count()) c.datagen.tasks = gen_tasks;
      if (gen_runs_opt->count()) c.datagen.runs_per_task = gen_runs;
      if (gen_n_opt->count()) c.datagen.forced_n = gen_n;
      if (gen_out_opt->count()) c.datagen.output = gen_output;
      return cmd_generate(c, out);
    }
    if (train->parsed()) {
      PipelineConfig c = resolve_config(train_flags);
      if (train_ds_opt->count()) c.controller.dataset = train_dataset;
      if (train_out_opt->count()) c.controller.output = train_output;
      if (train_epochs_opt->count()) c.controller.train.epochs = train_epochs;
      if (train_batch_opt->count()) c.controller.train.batch_size = train_batch;
      if (train_lr_opt->count()) c.controller.train.lr = train_lr;
      if (train_split_opt->count()) c.controller.train.split = train_split;
      return cmd_train(c, train_quiet, out);
    }
    if (eval->parsed()) {
      PipelineConfig c = resolve_config(eval_flags);
      if (eval_ds_opt->count()) c.evaluate.dataset = eval_dataset;
      if (eval_w_opt->count()) c.evaluate.weights = eval_weights;
      if (eval_split_opt->count()) c.evaluate.split = parse_eval_split(eval_split);
      return cmd_evaluate(c, out);
    }
    if (bench->parsed()) {
      PipelineConfig c = resolve_config(bench_flags);
      if (bench_tasks_opt->count()) c.benchmark.tasks = bench_tasks;
      if (bench_lr0_opt->count()) c.benchmark.lr0 = bench_lr0;
      if (bench_runs_opt->count()) c.benchmark.runs = bench_runs;
      if (bench_h_opt->count()) c.benchmark.horizon = bench_horizon;
      if (bench_dec_opt->count()) c.benchmark.decimals = bench_decimals;
      if (bench_w_opt->count()) c.benchmark.weights = bench_weights;
      if (bench_out_opt->count()) c.benchmark.output = bench_output;
      return cmd_benchmark(c, out);
    }
    if (inspect->parsed()) {
      resolve_config(inspect_flags);
      return cmd_inspect(inspect_target, out);
    }
  } catch (const UsageError& e) {
    return report(err, "usage", e, ExitCode::kUsage);
  } catch (const DataError& e) {
    return report(err, "data", e, ExitCode::kData);
  } catch (const NumericError& e) {
    return report(err, "numeric", e, ExitCode::kNumeric);
  } catch (const std::filesystem::filesystem_error& e) {
    return report(err, "io", e, ExitCode::kUsage);
  } catch (const std::exception& e) {
    return report(err, "error", e, ExitCode::kFailure);
  }
  return static_cast<int>(ExitCode::kUsage);
}

}  // namespace arc
