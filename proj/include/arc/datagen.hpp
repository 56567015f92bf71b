// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Branch-and-label data generation: train a segment, checkpoint, try the three
// LR multipliers from the checkpoint, label with the best one, continue with a
// random survivor, and use the repeated segment to demote noisy labels.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arc/decision.hpp"
#include "arc/sample.hpp"
#include "arc/signal.hpp"
#include "arc/trainee.hpp"

namespace arc {

inline constexpr int kSegmentsPerRun = 10;
inline constexpr int kMaxSegmentLength = 10;

struct RunConfig {
  int n = 1;                           // segment length in epochs, 1..10
  int total_epochs = kSegmentsPerRun;  // 10 n
  double lr0 = 1e-3;
  std::uint64_t seed = 0;
  std::string task_id;
  int run_index = 0;

  static RunConfig make(std::string task_id, int n, double lr0, std::uint64_t seed, int run_index = 0);
  void validate() const;
};

// Argmin over branch losses; NaN counts as +inf; exact ties go to Constant,
// then Decrease.
LrDecision label_from_losses(double l_plus, double l_one, double l_minus);
LrDecision label_from_losses(const BranchLosses& losses);

// Branch dropped before continuing: the largest loss, ties resolved toward
// Increase, then Decrease.
LrDecision eliminated_branch(const BranchLosses& losses);

// True when replacing the chosen branch's loss by the repeated loss keeps every
// pairwise ordering of the three losses.
bool rank_order_preserved(const BranchLosses& losses, LrDecision chosen, double repeated_loss);

// Original argmin label if the ordering survives the repeat, Constant otherwise.
LrDecision correct_label(const BranchLosses& losses, LrDecision chosen, double repeated_loss);

struct RunResult {
  RunConfig config;
  std::vector<Sample> samples;
  std::vector<HistoryRecord> history;  // main trajectory, one record per epoch
  bool diverged = false;
};

RunResult run_branching_protocol(Trainee& trainee, const RunConfig& config);

struct TaskSummary {
  std::string task_id;
  int runs = 0;
  int diverged_runs = 0;
  std::size_t samples = 0;
  std::array<std::size_t, kNumDecisions> class_counts{};
};

struct Dataset {
  std::uint64_t seed = 0;
  int runs_per_task = 0;
  std::optional<int> forced_n;
  std::vector<TaskSpec> tasks;
  std::vector<Sample> samples;
  std::vector<RunResult> runs;
  std::vector<TaskSummary> summaries;

  std::array<std::size_t, kNumDecisions> class_counts() const;
};

// Runs `runs_per_task` branching runs per task with lr0 drawn log-uniformly in
// the task range and n uniformly in [1, 10] (unless forced).
Dataset generate_dataset(std::span<const TaskSpec> tasks, int runs_per_task, std::uint64_t seed,
                         std::optional<int> forced_n = std::nullopt);

// Dataset directory layout (all text, format version 1):
//   samples.jsonl  one Sample per line
//   runs.jsonl     raw per-epoch history of every run
//   manifest.json  format version, seed, task table, per-task counts, class balance
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr const char* kSamplesFile = "samples.jsonl";
inline constexpr const char* kRunsFile = "runs.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
// Accepts a dataset directory or a samples.jsonl path.
std::vector<Sample> read_samples(const std::filesystem::path& path);
std::string manifest_text(const Dataset& dataset);

}  // namespace arc
