// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>

#include "arc/decision.hpp"
#include "arc/signal.hpp"

namespace arc {

// Validation losses at the end of the three branches, indexed by decision
// (Decrease, Constant, Increase). Diverged branches hold +inf.
using BranchLosses = std::array<double, kNumDecisions>;

// One labeled controller example produced by the branching protocol.
struct Sample {
  FeatureWindow window;
  LrDecision label = LrDecision::kConstant;
  LrDecision raw_label = LrDecision::kConstant;  // argmin label before correction
  int n = 1;
  int segment_index = 0;
  int run_index = 0;
  std::string task_id;
  double lr_at_branch = 0.0;
  BranchLosses branch_losses{};
  std::optional<LrDecision> continued;  // branch carried into the next segment
  std::optional<double> repeated_loss;  // that branch's loss when re-run
  bool corrected = false;
  bool correctable = true;
};

inline double branch_loss(const BranchLosses& losses, LrDecision d) {
  return losses[index_of(d)];
}

}  // namespace arc
