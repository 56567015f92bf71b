// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arc/errors.hpp"
#include "arc/rng.hpp"

namespace arc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double loss) { return std::isnan(loss) ? kInf : loss; }

int compare(double a, double b) { return a < b ? -1 : (a > b ? 1 : 0); }

// Seed streams inside one run.
std::uint64_t main_stream(std::uint64_t seed, int segment) {
  return mix_seed(seed, 4 * static_cast<std::uint64_t>(segment));
}
std::uint64_t branch_stream(std::uint64_t seed, int segment, LrDecision d) {
  return mix_seed(seed, 4 * static_cast<std::uint64_t>(segment) + 1 + index_of(d));
}
constexpr std::uint64_t kChooserStream = 0xC40C5E;

}  // namespace

RunConfig RunConfig::make(std::string task_id, int n, double lr0, std::uint64_t seed, int run_index) {
  RunConfig c;
  c.task_id = std::move(task_id);
  c.n = n;
  c.total_epochs = kSegmentsPerRun * n;
  c.lr0 = lr0;
  c.seed = seed;
  c.run_index = run_index;
  return c;
}

void RunConfig::validate() const {
  if (n < 1 || n > kMaxSegmentLength) throw UsageError("run config: n must lie in [1, 10]");
  if (total_epochs <= 0 || total_epochs % n != 0) {
    throw UsageError("run config: total_epochs must be a positive multiple of n");
  }
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw UsageError("run config: lr0 must be positive");
}

LrDecision label_from_losses(double l_plus, double l_one, double l_minus) {
  BranchLosses losses{};
  losses[index_of(LrDecision::kIncrease)] = l_plus;
  losses[index_of(LrDecision::kConstant)] = l_one;
  losses[index_of(LrDecision::kDecrease)] = l_minus;
  return label_from_losses(losses);
}

LrDecision label_from_losses(const BranchLosses& losses) {
  LrDecision best = kTieBreakOrder[0];
  for (LrDecision d : kTieBreakOrder) {
    if (sanitize(branch_loss(losses, d)) < sanitize(branch_loss(losses, best))) best = d;
  }
  return best;
}

LrDecision eliminated_branch(const BranchLosses& losses) {
  constexpr std::array<LrDecision, kNumDecisions> order = {
      LrDecision::kIncrease, LrDecision::kDecrease, LrDecision::kConstant};
  LrDecision worst = order[0];
  for (LrDecision d : order) {
    if (sanitize(branch_loss(losses, d)) > sanitize(branch_loss(losses, worst))) worst = d;
  }
  return worst;
}

bool rank_order_preserved(const BranchLosses& losses, LrDecision chosen, double repeated_loss) {
  BranchLosses before{};
  for (std::size_t i = 0; i < kNumDecisions; ++i) before[i] = sanitize(losses[i]);
  BranchLosses after = before;
  after[index_of(chosen)] = sanitize(repeated_loss);
  for (std::size_t i = 0; i < kNumDecisions; ++i) {
    for (std::size_t j = i + 1; j < kNumDecisions; ++j) {
      if (compare(before[i], before[j]) != compare(after[i], after[j])) return false;
    }
  }
  return true;
}

LrDecision correct_label(const BranchLosses& losses, LrDecision chosen, double repeated_loss) {
  return rank_order_preserved(losses, chosen, repeated_loss) ? label_from_losses(losses)
                                                             : LrDecision::kConstant;
}

RunResult run_branching_protocol(Trainee& trainee, const RunConfig& config) {
  config.validate();
  if (config.task_id != trainee.spec().task_id) {
    throw UsageError("run_branching_protocol: config task does not match trainee");
  }
  RunResult result;
  result.config = config;
  const int n = config.n;
  const int segments = config.total_epochs / n;
  Rng chooser(mix_seed(config.seed, kChooserStream));

  double lr = config.lr0;
  std::optional<LrDecision> pending_choice;

  for (int k = 0; k < segments; ++k) {
    // Train n epochs at lr. For k > 0 this repeats the branch chosen last time.
    trainee.reseed(main_stream(config.seed, k));
    const auto stats = trainee.train_epochs(n, lr);
    bool finite = true;
    for (const auto& s : stats) {
      const int epoch = static_cast<int>(result.history.size());
      result.history.push_back({epoch, s.train_loss, s.val_loss, lr});
      finite = finite && std::isfinite(s.train_loss) && std::isfinite(s.val_loss);
    }

    if (pending_choice) {
      Sample& prev = result.samples.back();
      const double repeated = trainee.val_loss();
      prev.continued = *pending_choice;
      prev.repeated_loss = repeated;
      prev.corrected = !rank_order_preserved(prev.branch_losses, *pending_choice, repeated);
      prev.label = correct_label(prev.branch_losses, *pending_choice, repeated);
    }
    if (!finite) {
      result.diverged = true;
      break;
    }

    const TraineeCheckpoint checkpoint = trainee.snapshot();
    const int completed = (k + 1) * n;

    BranchLosses losses{};
    for (LrDecision d : {LrDecision::kIncrease, LrDecision::kConstant, LrDecision::kDecrease}) {
      trainee.restore(checkpoint);
      trainee.reseed(branch_stream(config.seed, k, d));
      trainee.train_epochs(n, lr * multiplier(d));
      losses[index_of(d)] = sanitize(trainee.val_loss());
    }
    if (std::all_of(losses.begin(), losses.end(), [](double l) { return !std::isfinite(l); })) {
      result.diverged = true;
      break;
    }

    Sample sample;
    sample.window = build_feature_window(result.history, n, completed);
    sample.raw_label = label_from_losses(losses);
    sample.label = sample.raw_label;
    sample.n = n;
    sample.segment_index = k;
    sample.run_index = config.run_index;
    sample.task_id = config.task_id;
    sample.lr_at_branch = lr;
    sample.branch_losses = losses;
    sample.correctable = k + 1 < segments;
    result.samples.push_back(std::move(sample));

    // Drop the worst branch and continue from the checkpoint with a random survivor.
    const LrDecision dropped = eliminated_branch(losses);
    std::array<LrDecision, 2> survivors{};
    std::size_t s = 0;
    for (LrDecision d : kAllDecisions) {
      if (d != dropped) survivors[s++] = d;
    }
    LrDecision chosen = survivors[chooser.below(2)];
    const LrDecision other = chosen == survivors[0] ? survivors[1] : survivors[0];
    if (!std::isfinite(branch_loss(losses, chosen)) && std::isfinite(branch_loss(losses, other))) {
      chosen = other;
    }
    trainee.restore(checkpoint);
    lr *= multiplier(chosen);
    pending_choice = chosen;
  }
  return result;
}

std::array<std::size_t, kNumDecisions> Dataset::class_counts() const {
  std::array<std::size_t, kNumDecisions> counts{};
  for (const auto& s : samples) ++counts[index_of(s.label)];
  return counts;
}

Dataset generate_dataset(std::span<const TaskSpec> tasks, int runs_per_task, std::uint64_t seed,
                         std::optional<int> forced_n) {
  if (tasks.empty()) throw UsageError("generate_dataset: no tasks");
  if (runs_per_task <= 0) throw UsageError("generate_dataset: runs_per_task must be positive");
  if (forced_n && (*forced_n < 1 || *forced_n > kMaxSegmentLength)) {
    throw UsageError("generate_dataset: forced n must lie in [1, 10]");
  }
  for (const auto& t : tasks) t.validate();

  Dataset data;
  data.seed = seed;
  data.runs_per_task = runs_per_task;
  data.forced_n = forced_n;
  data.tasks.assign(tasks.begin(), tasks.end());

  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const TaskSpec& task = tasks[ti];
    TaskSummary summary;
    summary.task_id = task.task_id;
    for (int r = 0; r < runs_per_task; ++r) {
      const std::uint64_t run_seed = mix_seed(mix_seed(seed, ti), static_cast<std::uint64_t>(r));
      Rng draw(mix_seed(run_seed, 0xD1CE));
      const double lr0 = std::exp(draw.uniform(std::log(task.min_lr0), std::log(task.max_lr0)));
      const int n = forced_n ? *forced_n : 1 + static_cast<int>(draw.below(kMaxSegmentLength));

      auto trainee = make_trainee(task, run_seed);
      RunResult run = run_branching_protocol(*trainee, RunConfig::make(task.task_id, n, lr0, run_seed, r));
      ++summary.runs;
      if (run.diverged) ++summary.diverged_runs;
      for (const auto& s : run.samples) {
        ++summary.class_counts[index_of(s.label)];
        data.samples.push_back(s);
      }
      summary.samples += run.samples.size();
      data.runs.push_back(std::move(run));
    }
    data.summaries.push_back(summary);
  }
  return data;
}

}  // namespace arc
