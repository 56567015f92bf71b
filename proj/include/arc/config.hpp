// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Pipeline configuration file (JSON). Every section is optional; missing keys
// keep their defaults and unknown keys are rejected. Relative paths resolve
// against the directory holding the config file.
//
//   {
//     "format_version": 1,
//     "seed": 1,
//     "datagen":    {"tasks": [...], "runs_per_task": 24, "forced_n": null, "output": "data"},
//     "controller": {"dataset": "data", "output": "controller.arcw", "epochs": 300,
//                    "batch_size": 128, "lr": 1e-4, "split": 0.7},
//     "evaluate":   {"dataset": "data", "weights": "controller.arcw", "split": "validation"},
//     "benchmark":  {"tasks": ["mlp_rings"], "lr0": [0.05, 0.3, 2.0], "runs": 5, "horizon": 30,
//                    "weights": "controller.arcw", "output": "bench", "decimals": 1,
//                    "schedulers": [{"name": "BLR", "kind": "constant"}, ...]}
//   }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "arc/bench.hpp"
#include "arc/controller.hpp"

namespace arc {

inline constexpr int kConfigFormatVersion = 1;

struct DatagenSection {
  std::vector<std::string> tasks{"quadratic", "logistic", "mlp"};
  int runs_per_task = 24;
  std::optional<int> forced_n;
  std::filesystem::path output = "data";
};

struct ControllerSection {
  std::filesystem::path dataset = "data";
  std::filesystem::path output = "controller.arcw";
  TrainConfig train;  // seed is filled from the top-level seed
};

enum class EvalSplit { kAll, kTrain, kValidation };

struct EvaluateSection {
  std::filesystem::path dataset = "data";
  std::filesystem::path weights = "controller.arcw";
  EvalSplit split = EvalSplit::kValidation;
};

struct BenchmarkSection {
  std::vector<std::string> tasks{"mlp_rings"};
  std::vector<SchedulerSpec> schedulers = default_schedulers();
  std::vector<double> lr0{0.05, 0.3, 2.0};
  int runs = 5;
  int horizon = 30;
  std::filesystem::path weights = "controller.arcw";
  std::filesystem::path output = "bench";
  int decimals = 1;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  DatagenSection datagen;
  ControllerSection controller;
  EvaluateSection evaluate;
  BenchmarkSection benchmark;
};

// Throws UsageError on malformed JSON, wrong types, unknown keys or bad values.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

// Throws UsageError if the file is missing or unreadable.
PipelineConfig load_config(const std::filesystem::path& path);

// Benchmark seeds derived from the top-level seed: mix_seed(seed, i).
std::vector<std::uint64_t> benchmark_seeds(std::uint64_t seed, int runs);

EvalSplit parse_eval_split(std::string_view text);
std::string to_string(EvalSplit split);

}  // namespace arc
