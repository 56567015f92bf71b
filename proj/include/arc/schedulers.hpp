// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "arc/controller.hpp"
#include "arc/decision.hpp"
#include "arc/signal.hpp"
#include "arc/trainee.hpp"

namespace arc {

struct ConstantLr {
  double lr0 = 1e-3;
};

// One cosine half-period from lr_max to lr_min over horizon_t epochs
// (0 means the run horizon); lr_min is held afterwards.
struct CosineDecay {
  double lr_max = 1e-3;
  double lr_min = 0.0;
  int horizon_t = 0;
};

// Cosine with warm restarts; cycle c lasts t0 * t_mult^c epochs.
struct CyclicCosine {
  double lr_max = 1e-3;
  double lr_min = 0.0;
  int t0 = 14;
  int t_mult = 2;
};

struct ExponentialDecay {
  double lr0 = 1e-3;
  double gamma = 0.96;
};

struct ArcControlled {
  double lr0 = 1e-3;
  int invocations = 10;
  std::shared_ptr<const ControllerWeights> weights;
};

using SchedulerConfig = std::variant<ConstantLr, CosineDecay, CyclicCosine, ExponentialDecay, ArcControlled>;

void validate(const SchedulerConfig& config);

// LR for a closed-form schedule. Throws UsageError for epochs outside
// [0, horizon) and for ArcControlled, whose LR depends on the run.
double lr_at(const SchedulerConfig& config, int epoch, int horizon);

// First epoch of every cycle that starts before `horizon`, plus `horizon`
// itself when a cycle ends exactly there.
std::vector<int> cycle_boundaries(const CyclicCosine& config, int horizon);

// Evenly spaced epochs after which the controller is queried:
// floor((i + 1) * total / invocations) - 1.
std::vector<int> invocation_epochs(int total_epochs, int invocations);

struct ArcStep {
  double new_lr = 0.0;
  LrDecision decision = LrDecision::kConstant;
};

// Builds the window over the completed epochs in `history`, asks the controller
// and applies the multiplier.
ArcStep arc_step(double current_lr, std::span<const HistoryRecord> history, int n,
                 const ControllerWeights& weights);

struct TraceRow {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::optional<LrDecision> decision;  // controller call made after this epoch
};

struct LrTrace {
  std::vector<TraceRow> rows;
  bool diverged = false;
  double final_val_loss = 0.0;
};

// Trains `trainee` for `horizon` epochs under the schedule. Stops early if
// the trainee diverges.
LrTrace run_schedule(Trainee& trainee, const SchedulerConfig& config, int horizon);

}  // namespace arc
