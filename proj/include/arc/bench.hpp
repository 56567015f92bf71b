// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment grid runner and report emitters. The metric is the final
// validation loss, so lower is better everywhere in this file.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arc/controller.hpp"
#include "arc/schedulers.hpp"

namespace arc {

enum class SchedulerKind { kConstant, kCosine, kCyclicCosine, kExponential, kArc };

std::string to_string(SchedulerKind kind);
SchedulerKind parse_scheduler_kind(std::string_view text);

// A scheduler with every setting except the initial LR, which comes from the
// grid column. lr_min for the cosine variants is lr_min_ratio * lr0.
struct SchedulerSpec {
  std::string name;
  SchedulerKind kind = SchedulerKind::kConstant;
  double lr_min_ratio = 0.0;
  int horizon_t = 0;
  int t0 = 14;
  int t_mult = 2;
  double gamma = 0.96;
  int invocations = 10;

  void validate() const;
};

// BLR, CD, CCD, ED, ARC with their default settings.
std::vector<SchedulerSpec> default_schedulers();

SchedulerConfig instantiate(const SchedulerSpec& spec, double lr0,
                            std::shared_ptr<const ControllerWeights> weights);

struct ExperimentGrid {
  std::vector<std::string> task_ids;
  std::vector<SchedulerSpec> schedulers;
  std::vector<double> lr0_values;
  std::vector<std::uint64_t> seeds;
  int horizon = 30;
  std::shared_ptr<const ControllerWeights> weights;  // needed by ARC rows

  void validate() const;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double final_val_loss = 0.0;  // +inf when diverged
  bool diverged = false;
  LrTrace trace;
};

struct CellResult {
  std::string task_id;
  std::string scheduler;
  double lr0 = 0.0;
  std::vector<SeedRun> runs;      // grid seed order
  std::optional<double> mean;     // over non-diverged runs
  std::optional<double> stddev;   // population
  int diverged_count = 0;
  std::optional<std::size_t> median_run;  // index into runs
};

struct BenchmarkReport {
  std::vector<std::string> task_ids;
  std::vector<std::string> schedulers;
  std::vector<double> lr0_values;
  std::vector<std::uint64_t> seeds;
  int horizon = 0;
  std::uint64_t config_digest = 0;
  std::vector<CellResult> cells;  // task-major, then scheduler, then lr0

  const CellResult& cell(std::string_view task_id, std::string_view scheduler, double lr0) const;
};

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

// Population mean and standard deviation. Throws UsageError when empty.
Stats population_stats(std::span<const double> values);

// Index of the median of the finite entries: the lower middle element after a
// stable sort, so ties go to the lower index. nullopt if none are finite.
std::optional<std::size_t> median_index(std::span<const double> values);

// Digest of everything that determines the report: grid settings, scheduler
// specs and the controller weights.
std::uint64_t grid_digest(const ExperimentGrid& grid);

// Runs every (task, scheduler, lr0, seed) cell. A trainee for seed s is
// constructed from the same seed under every scheduler.
BenchmarkReport run_grid(const ExperimentGrid& grid);

// Deterministic report body (no timestamps) and the separate metadata file.
std::string report_json(const BenchmarkReport& report);
std::string metadata_json(const BenchmarkReport& report, std::string_view created_utc);

// "3.0 ± 1.4" style cell text.
std::string format_mean_std(double mean, double stddev, int decimals);

std::string table_csv(const BenchmarkReport& report, std::string_view task_id, int decimals = 1);
std::string table_markdown(const BenchmarkReport& report, std::string_view task_id, int decimals = 1);

// One CSV and one markdown table per task under `dir`. Returns written paths.
std::vector<std::filesystem::path> emit_tables(const BenchmarkReport& report, const std::filesystem::path& dir,
                                               int decimals = 1);

// Median-run series for one (task, lr0): epoch plus lr and val_loss columns per
// scheduler. Epochs after a divergence are left empty.
std::string plot_csv(const BenchmarkReport& report, std::string_view task_id, double lr0);
std::string plot_svg(const BenchmarkReport& report, std::string_view task_id, double lr0);

// One CSV and one SVG per (task, lr0) under `dir`. Returns written paths.
std::vector<std::filesystem::path> emit_plots(const BenchmarkReport& report, const std::filesystem::path& dir);

// Compact lr0 label used in file names and table headers, e.g. "0.05", "1e-04".
std::string format_lr(double lr);

}  // namespace arc
