// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/trainee.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "arc/errors.hpp"
#include "arc/rng.hpp"

namespace arc {
namespace {

TaskSpec quiet_quadratic() {
  TaskSpec s = find_task("quadratic");
  s.default_noise = 0.0;
  return s;
}

// Closed-form validation loss of noiseless gradient descent on the quadratic
// after `steps` steps at `lr`, computed in the eigenbasis.
double quadratic_oracle(const QuadraticProblem& p, const Eigen::VectorXd& w0, double lr, int steps) {
  const Eigen::VectorXd c0 = p.basis.transpose() * (w0 - p.optimum);
  const Eigen::VectorXd d = p.basis.transpose() * (p.val_target - p.optimum);
  double loss = 0.0;
  for (Eigen::Index k = 0; k < c0.size(); ++k) {
    const double ck = std::pow(1.0 - lr * p.eigenvalues[k], steps) * c0[k];
    loss += 0.5 * p.eigenvalues[k] * (ck - d[k]) * (ck - d[k]);
  }
  return loss;
}

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double scale) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

std::vector<int> random_rows(Rng& rng, int count, int n) {
  std::vector<int> rows(static_cast<std::size_t>(count));
  for (auto& r : rows) r = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  return rows;
}

template <typename LossFn>
double fd_max_relative_error(Eigen::VectorXd params, const Eigen::VectorXd& grad, LossFn&& loss) {
  const double eps = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = loss(params);
    params[i] = saved - eps;
    const double down = loss(params);
    params[i] = saved;
    const double fd = (up - down) / (2 * eps);
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-7}));
  }
  return worst;
}

TEST(TaskRegistry, BuiltinTasks) {
  ASSERT_GE(builtin_tasks().size(), 4u);
  for (const auto& t : builtin_tasks()) {
    EXPECT_NO_THROW(t.validate());
    EXPECT_EQ(&find_task(t.task_id), &t);
  }
  EXPECT_THROW(find_task("resnet"), UsageError);
  TaskSpec bad = find_task("logistic");
  bad.min_lr0 = bad.max_lr0;
  EXPECT_THROW(bad.validate(), UsageError);
  EXPECT_THROW(make_trainee(bad, 1), UsageError);
}

TEST(QuadraticProblem, SpectrumAndBasis) {
  const QuadraticProblem p = make_quadratic_problem(quiet_quadratic());
  const auto d = p.eigenvalues.size();
  EXPECT_DOUBLE_EQ(p.eigenvalues[0], 1.0);
  EXPECT_NEAR(p.eigenvalues[d - 1], 1e-3, 1e-15);
  EXPECT_TRUE((p.basis.transpose() * p.basis).isIdentity(1e-12));
  EXPECT_TRUE((p.basis * p.eigenvalues.asDiagonal() * p.basis.transpose()).isApprox(p.hessian, 1e-12));
}

TEST(QuadraticTrainee, NoiselessMatchesClosedForm) {
  for (double lr : {0.01, 0.3, 1.0, 1.9}) {
    QuadraticTrainee t(quiet_quadratic(), 77);
    const Eigen::VectorXd w0 = t.params();
    const int steps = t.spec().steps_per_epoch;
    for (int epoch = 1; epoch <= 5; ++epoch) {
      const EpochStats s = t.train_epoch(lr);
      const double expected = quadratic_oracle(t.problem(), w0, lr, epoch * steps);
      EXPECT_NEAR(s.val_loss, expected, 1e-10 * std::max(1.0, expected)) << "lr " << lr << " epoch " << epoch;
    }
  }
}

TEST(QuadraticTrainee, DivergesAboveStabilityBound) {
  QuadraticTrainee t(quiet_quadratic(), 78);
  const EpochStats s = t.train_epoch(2.0 / QuadraticProblem::kMaxEigenvalue * 1.25);
  EXPECT_TRUE(std::isinf(s.val_loss));
  EXPECT_TRUE(t.diverged());
  EXPECT_TRUE(std::isinf(t.val_loss()));
  EXPECT_TRUE(std::isinf(t.train_epoch(1e-3).val_loss));
}

TEST(QuadraticTrainee, ZeroLrKeepsLossConstant) {
  auto t = make_trainee(find_task("quadratic"), 79);
  const double before = t->val_loss();
  for (const auto& s : t->train_epochs(3, 0.0)) EXPECT_EQ(s.val_loss, before);
}

TEST(QuadraticTrainee, NoisyMeanMatchesClosedFormExpectation) {
  const TaskSpec spec = find_task("quadratic");
  const double lr = 0.5, sigma = spec.default_noise;
  const int steps = spec.steps_per_epoch;
  QuadraticTrainee base(spec, 80);
  const QuadraticProblem& p = base.problem();
  const Eigen::VectorXd c0 = p.basis.transpose() * (base.params() - p.optimum);
  const Eigen::VectorXd d = p.basis.transpose() * (p.val_target - p.optimum);
  double expected = 0.0;
  for (Eigen::Index k = 0; k < c0.size(); ++k) {
    const double a = 1.0 - lr * p.eigenvalues[k];
    const double mean = std::pow(a, steps) * c0[k];
    double var = 0.0;
    for (int s = 0; s < steps; ++s) var += std::pow(a, 2 * s);
    var *= lr * lr * sigma * sigma;
    expected += 0.5 * p.eigenvalues[k] * ((mean - d[k]) * (mean - d[k]) + var);
  }
  const auto start = base.snapshot();
  const int trials = 400;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < trials; ++i) {
    base.restore(start);
    base.reseed(mix_seed(5, static_cast<std::uint64_t>(i)));
    const double v = base.train_epoch(lr).val_loss;
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum_sq / trials - mean * mean) / trials);
  EXPECT_NEAR(mean, expected, 4 * se + 1e-12) << "se " << se;
}

TEST(LogisticTrainee, GradientCheck) {
  const LogisticTrainee t(find_task("logistic"), 81);
  Rng rng(82);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd params = random_vector(rng, LogisticTrainee::kFeatures + 1, 0.5);
    const auto rows = random_rows(rng, 16, static_cast<int>(t.train_data().labels.size()));
    const LossGrad lg = LogisticTrainee::loss_and_grad(params, t.train_data(), rows);
    const double err = fd_max_relative_error(params, lg.grad, [&](const Eigen::VectorXd& p) {
      return LogisticTrainee::loss_and_grad(p, t.train_data(), rows).loss;
    });
    EXPECT_LT(err, 1e-6);
  }
}

TEST(LogisticTrainee, SmallLrDescendsMonotonically) {
  auto t = make_trainee(find_task("logistic"), 83);
  double prev = t->val_loss();
  for (const auto& s : t->train_epochs(20, 1e-3)) {
    EXPECT_LE(s.val_loss, prev);
    prev = s.val_loss;
  }
}

TEST(MlpTrainee, GradientCheck) {
  for (const char* id : {"mlp", "mlp_rings"}) {
    const TaskSpec& spec = find_task(id);
    const MlpTrainee t(spec, 84);
    Rng rng(85);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd params = random_vector(rng, t.params().size(), 0.8);
      const auto rows = random_rows(rng, 16, static_cast<int>(t.train_data().labels.size()));
      const LossGrad lg = MlpTrainee::loss_and_grad(params, spec.hidden, t.train_data(), rows);
      const double err = fd_max_relative_error(params, lg.grad, [&](const Eigen::VectorXd& p) {
        return MlpTrainee::loss_and_grad(p, spec.hidden, t.train_data(), rows).loss;
      });
      EXPECT_LT(err, 1e-4) << id;
    }
  }
}

TEST(MlpTrainee, LargeLrBeatsSmallLrInTenEpochs) {
  const TaskSpec& spec = find_task("mlp");
  auto fast = make_trainee(spec, 86);
  auto slow = make_trainee(spec, 86);
  const double fast_loss = fast->train_epochs(10, spec.max_lr0).back().val_loss;
  const double slow_loss = slow->train_epochs(10, spec.min_lr0).back().val_loss;
  EXPECT_LT(fast_loss, slow_loss);
}

class EveryTask : public ::testing::TestWithParam<std::string> {};

TEST_P(EveryTask, SameSeedSameTrajectory) {
  const TaskSpec& spec = find_task(GetParam());
  auto a = make_trainee(spec, 90);
  auto b = make_trainee(spec, 90);
  const double lr = std::sqrt(spec.min_lr0 * spec.max_lr0);
  const auto ta = a->train_epochs(4, lr);
  const auto tb = b->train_epochs(4, lr);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    EXPECT_EQ(ta[i].train_loss, tb[i].train_loss);
    EXPECT_EQ(ta[i].val_loss, tb[i].val_loss);
  }
}

TEST_P(EveryTask, SnapshotRestoreIsExact) {
  const TaskSpec& spec = find_task(GetParam());
  auto t = make_trainee(spec, 91);
  const double lr = std::sqrt(spec.min_lr0 * spec.max_lr0);
  t->train_epochs(2, lr);
  const double before = t->val_loss();
  const TraineeCheckpoint cp = t->snapshot();
  EXPECT_EQ(cp.epoch, 2);
  const auto cont = t->train_epochs(3, lr);
  t->restore(cp);
  EXPECT_EQ(t->val_loss(), before);
  EXPECT_EQ(t->epoch(), 2);
  const auto again = t->train_epochs(3, lr);
  for (std::size_t i = 0; i < cont.size(); ++i) {
    EXPECT_EQ(cont[i].train_loss, again[i].train_loss);
    EXPECT_EQ(cont[i].val_loss, again[i].val_loss);
  }
}

TEST_P(EveryTask, SplitTrainingEqualsContinuousTraining) {
  const TaskSpec& spec = find_task(GetParam());
  auto a = make_trainee(spec, 92);
  auto b = make_trainee(spec, 92);
  const double lr = std::sqrt(spec.min_lr0 * spec.max_lr0);
  a->train_epochs(5, lr);
  b->train_epochs(2, lr);
  b->train_epochs(3, lr);
  EXPECT_EQ(a->val_loss(), b->val_loss());
  const std::vector<double> schedule{lr, lr * 0.618, lr};
  auto c = make_trainee(spec, 93);
  auto d = make_trainee(spec, 93);
  c->train_epochs(schedule);
  for (double r : schedule) d->train_epoch(r);
  EXPECT_EQ(c->val_loss(), d->val_loss());
}

TEST_P(EveryTask, ValLossIsPureObservation) {
  auto t = make_trainee(find_task(GetParam()), 94);
  const double a = t->val_loss();
  EXPECT_EQ(t->val_loss(), a);
  EXPECT_EQ(t->epoch(), 0);
}

TEST_P(EveryTask, FiniteAtRangeEndsAfterOneEpoch) {
  const TaskSpec& spec = find_task(GetParam());
  for (double lr : {spec.min_lr0, spec.max_lr0}) {
    auto t = make_trainee(spec, 95);
    const EpochStats s = t->train_epoch(lr);
    EXPECT_TRUE(std::isfinite(s.train_loss)) << lr;
    EXPECT_TRUE(std::isfinite(s.val_loss)) << lr;
  }
}

TEST_P(EveryTask, RestoreRejectsForeignOrDamagedCheckpoints) {
  const TaskSpec& spec = find_task(GetParam());
  auto t = make_trainee(spec, 96);
  TraineeCheckpoint cp = t->snapshot();
  cp.blob.back() ^= 1;
  EXPECT_THROW(t->restore(cp), DataError);
  const std::string other = spec.task_id == "quadratic" ? "logistic" : "quadratic";
  auto u = make_trainee(find_task(other), 96);
  EXPECT_THROW(t->restore(u->snapshot()), DataError);
  EXPECT_NE(t->description().find(spec.task_id), std::string::npos);
  EXPECT_THROW(t->train_epoch(-1.0), UsageError);
}

INSTANTIATE_TEST_SUITE_P(Builtin, EveryTask, ::testing::Values("quadratic", "logistic", "mlp", "mlp_rings"));

}  // namespace
}  // namespace arc
