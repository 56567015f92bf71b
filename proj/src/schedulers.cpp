// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/schedulers.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "arc/errors.hpp"

namespace arc {
namespace {

double cosine(double lr_max, double lr_min, double t, double period) {
  return lr_min + (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * t / period)) / 2.0;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* message) {
  if (!ok) throw UsageError(message);
}

}  // namespace

void validate(const SchedulerConfig& config) {
  std::visit(Overloaded{
                 [](const ConstantLr& c) { require(c.lr0 > 0.0, "constant: lr0 must be positive"); },
                 [](const CosineDecay& c) {
                   require(c.lr_max > 0.0 && c.lr_min >= 0.0 && c.lr_min <= c.lr_max,
                           "cosine: need 0 <= lr_min <= lr_max, lr_max > 0");
                   require(c.horizon_t >= 0, "cosine: horizon_t must be >= 0");
                 },
                 [](const CyclicCosine& c) {
                   require(c.lr_max > 0.0 && c.lr_min >= 0.0 && c.lr_min <= c.lr_max,
                           "cyclic cosine: need 0 <= lr_min <= lr_max, lr_max > 0");
                   require(c.t0 >= 1 && c.t_mult >= 1, "cyclic cosine: need t0 >= 1 and t_mult >= 1");
                 },
                 [](const ExponentialDecay& c) {
                   require(c.lr0 > 0.0, "exponential: lr0 must be positive");
                   require(c.gamma > 0.0 && c.gamma <= 1.0, "exponential: gamma must lie in (0, 1]");
                 },
                 [](const ArcControlled& c) {
                   require(c.lr0 > 0.0, "arc: lr0 must be positive");
                   require(c.invocations >= 1, "arc: invocations must be >= 1");
                   require(c.weights != nullptr, "arc: controller weights missing");
                 },
             },
             config);
}

double lr_at(const SchedulerConfig& config, int epoch, int horizon) {
  if (horizon <= 0 || epoch < 0 || epoch >= horizon) throw UsageError("lr_at: epoch out of range");
  validate(config);
  return std::visit(
      Overloaded{
          [](const ConstantLr& c) { return c.lr0; },
          [&](const CosineDecay& c) {
            const int period = c.horizon_t > 0 ? c.horizon_t : horizon;
            if (epoch >= period) return c.lr_min;
            return cosine(c.lr_max, c.lr_min, epoch, period);
          },
          [&](const CyclicCosine& c) {
            long long start = 0;
            long long length = c.t0;
            while (epoch >= start + length) {
              start += length;
              length *= c.t_mult;
            }
            return cosine(c.lr_max, c.lr_min, static_cast<double>(epoch - start), static_cast<double>(length));
          },
          [&](const ExponentialDecay& c) { return c.lr0 * std::pow(c.gamma, epoch); },
          [](const ArcControlled&) -> double {
            throw UsageError("lr_at: the controller schedule has no closed form; use run_schedule");
          },
      },
      config);
}

std::vector<int> cycle_boundaries(const CyclicCosine& config, int horizon) {
  validate(config);
  std::vector<int> out;
  long long start = 0;
  long long length = config.t0;
  while (start + length <= horizon) {
    start += length;
    out.push_back(static_cast<int>(start));
    length *= config.t_mult;
  }
  return out;
}

std::vector<int> invocation_epochs(int total_epochs, int invocations) {
  if (invocations < 1 || total_epochs < 1) throw UsageError("invocation_epochs: counts must be positive");
  if (invocations > total_epochs) throw UsageError("invocation_epochs: more invocations than epochs");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(invocations));
  for (long long i = 0; i < invocations; ++i) {
    out.push_back(static_cast<int>((i + 1) * total_epochs / invocations - 1));
  }
  return out;
}

ArcStep arc_step(double current_lr, std::span<const HistoryRecord> history, int n,
                 const ControllerWeights& weights) {
  if (!(current_lr > 0.0)) throw UsageError("arc_step: lr must be positive");
  if (history.empty()) throw UsageError("arc_step: empty history");
  const int completed = history.back().epoch_index + 1;
  const FeatureWindow window = build_feature_window(history, n, completed);
  const LrDecision d = predict(weights, window);
  return {current_lr * multiplier(d), d};
}

LrTrace run_schedule(Trainee& trainee, const SchedulerConfig& config, int horizon) {
  if (horizon <= 0) throw UsageError("run_schedule: horizon must be positive");
  validate(config);
  LrTrace trace;
  const auto* arc = std::get_if<ArcControlled>(&config);
  std::vector<int> calls;
  if (arc) calls = invocation_epochs(horizon, arc->invocations);
  std::size_t next_call = 0;
  int last_call = -1;
  double lr = arc ? arc->lr0 : 0.0;
  std::vector<HistoryRecord> history;

  for (int epoch = 0; epoch < horizon; ++epoch) {
    if (!arc) lr = lr_at(config, epoch, horizon);
    const EpochStats s = trainee.train_epoch(lr);
    TraceRow row{epoch, lr, s.train_loss, s.val_loss, std::nullopt};
    if (!std::isfinite(s.train_loss) || !std::isfinite(s.val_loss)) {
      trace.rows.push_back(row);
      trace.diverged = true;
      trace.final_val_loss = std::numeric_limits<double>::infinity();
      return trace;
    }
    history.push_back({epoch, s.train_loss, s.val_loss, lr});
    if (arc && next_call < calls.size() && calls[next_call] == epoch) {
      const ArcStep step = arc_step(lr, history, epoch - last_call, *arc->weights);
      row.decision = step.decision;
      lr = step.new_lr;
      last_call = epoch;
      ++next_call;
    }
    trace.rows.push_back(row);
  }
  trace.final_val_loss = trace.rows.back().val_loss;
  return trace;
}

}  // namespace arc
