// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Desk-scale training tasks driven by an external learning rate.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "arc/bytes.hpp"
#include "arc/rng.hpp"

namespace arc {

enum class TaskFamily { kQuadratic, kLogistic, kMlpMoons, kMlpRings };

std::string_view to_string(TaskFamily family);
TaskFamily parse_task_family(std::string_view name);

struct TaskSpec {
  std::string task_id;
  TaskFamily family = TaskFamily::kQuadratic;
  double min_lr0 = 1e-3;
  double max_lr0 = 1.0;
  double default_noise = 0.0;  // stddev of Gaussian noise added to every gradient entry
  int dataset_size = 512;      // quadratic: dimension; otherwise training examples
  std::uint64_t seed = 0;      // fixes the problem instance (matrix or data set)
  int steps_per_epoch = 50;
  int batch_size = 32;
  int hidden = 16;             // MLP width

  void validate() const;
};

struct EpochStats {
  double train_loss = 0.0;  // mean of the step losses
  double val_loss = 0.0;    // at the end of the epoch
};

struct TraineeCheckpoint {
  Bytes blob;
  int epoch = 0;
  std::uint64_t digest = 0;
};

// A training task under external LR control. Instances are single-owner;
// snapshot()/restore() is the way to branch a run.
class Trainee {
 public:
  Trainee(TaskSpec spec, std::uint64_t run_seed);
  virtual ~Trainee() = default;

  Trainee(const Trainee&) = delete;
  Trainee& operator=(const Trainee&) = delete;

  EpochStats train_epoch(double lr);
  std::vector<EpochStats> train_epochs(int k, double lr);
  std::vector<EpochStats> train_epochs(std::span<const double> lr_per_epoch);

  // Pure observation. +inf once the run has diverged.
  double val_loss() const;

  TraineeCheckpoint snapshot() const;
  void restore(const TraineeCheckpoint& checkpoint);

  // Replaces the noise / batch-sampling stream.
  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

  const TaskSpec& spec() const { return spec_; }
  std::string description() const;
  int epoch() const { return epoch_; }
  bool diverged() const { return diverged_; }

 protected:
  // One optimizer step at `lr`; returns the loss measured before the update.
  virtual double step(double lr) = 0;
  virtual double compute_val_loss() const = 0;
  virtual void save_params(ByteWriter& out) const = 0;
  virtual void load_params(ByteReader& in) = 0;
  virtual std::string family_details() const = 0;

  // Call at the end of derived constructors.
  void finish_init();

  Rng& rng() { return rng_; }
  void add_gradient_noise(Eigen::Ref<Eigen::VectorXd> grad);

 private:
  TaskSpec spec_;
  Rng rng_;
  int epoch_ = 0;
  bool diverged_ = false;
  double divergence_cap_ = 0.0;
};

// Random positive-definite quadratic: f(w) = 0.5 (w - w*)' A (w - w*), with
// validation loss measured against a slightly shifted target.
struct QuadraticProblem {
  Eigen::VectorXd eigenvalues;  // descending, log-spaced in [kMinEigenvalue, kMaxEigenvalue]
  Eigen::MatrixXd basis;        // orthonormal eigenvectors as columns
  Eigen::MatrixXd hessian;
  Eigen::VectorXd optimum;
  Eigen::VectorXd val_target;

  static constexpr double kMaxEigenvalue = 1.0;
  static constexpr double kMinEigenvalue = 1e-3;
};

QuadraticProblem make_quadratic_problem(const TaskSpec& spec);

class QuadraticTrainee final : public Trainee {
 public:
  QuadraticTrainee(const TaskSpec& spec, std::uint64_t run_seed);
  const QuadraticProblem& problem() const { return problem_; }
  Eigen::VectorXd params() const { return problem_.optimum + problem_.basis * coords_; }
  // Displacement from the optimum in the eigenbasis; training runs in these
  // coordinates so each direction evolves independently.
  const Eigen::VectorXd& coords() const { return coords_; }

 protected:
  double step(double lr) override;
  double compute_val_loss() const override;
  void save_params(ByteWriter& out) const override;
  void load_params(ByteReader& in) override;
  std::string family_details() const override;

 private:
  QuadraticProblem problem_;
  Eigen::VectorXd val_offset_;  // validation target in the same coordinates
  Eigen::VectorXd coords_;
};

// Labeled examples stored one per row.
struct ClassificationData {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;  // 0 or 1
};

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// Mini-batch logistic regression with L2 regularisation on Gaussian blobs.
class LogisticTrainee final : public Trainee {
 public:
  static constexpr int kFeatures = 10;
  static constexpr double kL2 = 1e-3;

  LogisticTrainee(const TaskSpec& spec, std::uint64_t run_seed);

  // Params are [w..., b]. Loss is mean binary cross-entropy over `rows`
  // plus the L2 term.
  static LossGrad loss_and_grad(const Eigen::VectorXd& params, const ClassificationData& data,
                                std::span<const int> rows);

  const ClassificationData& train_data() const { return train_; }
  const Eigen::VectorXd& params() const { return params_; }

 protected:
  double step(double lr) override;
  double compute_val_loss() const override;
  void save_params(ByteWriter& out) const override;
  void load_params(ByteReader& in) override;
  std::string family_details() const override;

 private:
  ClassificationData train_;
  ClassificationData val_;
  Eigen::VectorXd params_;
};

// One-hidden-layer tanh network with a sigmoid output on a 2-D nonlinear data set.
class MlpTrainee final : public Trainee {
 public:
  MlpTrainee(const TaskSpec& spec, std::uint64_t run_seed);

  // Params are [W1 (hidden x 2, row-major), b1, w2, b2].
  static LossGrad loss_and_grad(const Eigen::VectorXd& params, int hidden,
                                const ClassificationData& data, std::span<const int> rows);

  const ClassificationData& train_data() const { return train_; }
  const Eigen::VectorXd& params() const { return params_; }

 protected:
  double step(double lr) override;
  double compute_val_loss() const override;
  void save_params(ByteWriter& out) const override;
  void load_params(ByteReader& in) override;
  std::string family_details() const override;

 private:
  ClassificationData train_;
  ClassificationData val_;
  Eigen::VectorXd params_;
};

// Builds a fresh trainee. The spec seed fixes the problem; run_seed fixes the
// initial parameters and the noise stream.
std::unique_ptr<Trainee> make_trainee(const TaskSpec& spec, std::uint64_t run_seed);

// Built-in task table.
const std::vector<TaskSpec>& builtin_tasks();
// Throws UsageError for an unknown id.
const TaskSpec& find_task(std::string_view task_id);

}  // namespace arc
