// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/trainee.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/QR>

#include "arc/errors.hpp"

namespace arc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// A run counts as diverged once a loss exceeds this multiple of its initial
// validation loss.
constexpr double kDivergenceFactor = 1e6;

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<int> all_rows(Eigen::Index n) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < static_cast<int>(n); ++i) rows[static_cast<std::size_t>(i)] = i;
  return rows;
}

std::vector<int> sample_rows(Rng& rng, Eigen::Index n, int count) {
  std::vector<int> rows(static_cast<std::size_t>(count));
  for (auto& r : rows) r = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  return rows;
}

void write_vector(ByteWriter& out, const Eigen::VectorXd& v) {
  out.put_f64s(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

void read_vector(ByteReader& in, Eigen::VectorXd& v) {
  in.get_f64s_into(std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
}

}  // namespace

std::string_view to_string(TaskFamily family) {
  switch (family) {
    case TaskFamily::kQuadratic: return "quadratic";
    case TaskFamily::kLogistic: return "logistic";
    case TaskFamily::kMlpMoons: return "mlp_moons";
    case TaskFamily::kMlpRings: return "mlp_rings";
  }
  return "?";
}

TaskFamily parse_task_family(std::string_view name) {
  for (auto f : {TaskFamily::kQuadratic, TaskFamily::kLogistic, TaskFamily::kMlpMoons,
                 TaskFamily::kMlpRings}) {
    if (to_string(f) == name) return f;
  }
  throw UsageError("unknown task family '" + std::string(name) + "'");
}

void TaskSpec::validate() const {
  if (task_id.empty()) throw UsageError("task spec: empty task_id");
  if (!(min_lr0 > 0.0) || !(min_lr0 < max_lr0)) {
    throw UsageError("task spec " + task_id + ": need 0 < min_lr0 < max_lr0");
  }
  if (!(default_noise >= 0.0)) throw UsageError("task spec " + task_id + ": noise must be >= 0");
  if (dataset_size < 2 || steps_per_epoch <= 0 || batch_size <= 0 || hidden <= 0) {
    throw UsageError("task spec " + task_id + ": sizes must be positive");
  }
}

Trainee::Trainee(TaskSpec spec, std::uint64_t run_seed) : spec_(std::move(spec)), rng_(run_seed) {
  spec_.validate();
}

void Trainee::finish_init() {
  const double v0 = compute_val_loss();
  if (!std::isfinite(v0)) throw NumericError("trainee " + spec_.task_id + ": non-finite initial loss");
  divergence_cap_ = kDivergenceFactor * std::max(v0, 1e-12);
}

void Trainee::add_gradient_noise(Eigen::Ref<Eigen::VectorXd> grad) {
  if (spec_.default_noise <= 0.0) return;
  for (Eigen::Index i = 0; i < grad.size(); ++i) grad[i] += spec_.default_noise * rng_.normal();
}

EpochStats Trainee::train_epoch(double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw UsageError("train_epoch: lr must be finite and >= 0");
  ++epoch_;
  if (diverged_) return {kInf, kInf};
  double sum = 0.0;
  for (int s = 0; s < spec_.steps_per_epoch; ++s) {
    const double loss = step(lr);
    if (!std::isfinite(loss) || loss > divergence_cap_) {
      diverged_ = true;
      return {kInf, kInf};
    }
    sum += loss;
  }
  const double val = val_loss();
  if (!std::isfinite(val)) {
    diverged_ = true;
    return {kInf, kInf};
  }
  return {sum / spec_.steps_per_epoch, val};
}

std::vector<EpochStats> Trainee::train_epochs(int k, double lr) {
  if (k < 0) throw UsageError("train_epochs: negative epoch count");
  std::vector<EpochStats> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(train_epoch(lr));
  return out;
}

std::vector<EpochStats> Trainee::train_epochs(std::span<const double> lr_per_epoch) {
  std::vector<EpochStats> out;
  out.reserve(lr_per_epoch.size());
  for (double lr : lr_per_epoch) out.push_back(train_epoch(lr));
  return out;
}

double Trainee::val_loss() const {
  if (diverged_) return kInf;
  const double v = compute_val_loss();
  if (!std::isfinite(v) || v > divergence_cap_) return kInf;
  return v;
}

TraineeCheckpoint Trainee::snapshot() const {
  ByteWriter out;
  out.put_string(spec_.task_id);
  out.put_i64(epoch_);
  out.put_u64(diverged_ ? 1 : 0);
  out.put_string(rng_.state());
  save_params(out);
  TraineeCheckpoint cp{out.take(), epoch_, 0};
  cp.digest = fnv1a64(cp.blob);
  return cp;
}

void Trainee::restore(const TraineeCheckpoint& checkpoint) {
  if (fnv1a64(checkpoint.blob) != checkpoint.digest) throw DataError("checkpoint: digest mismatch");
  ByteReader in(checkpoint.blob);
  if (in.get_string() != spec_.task_id) throw DataError("checkpoint: belongs to a different task");
  epoch_ = static_cast<int>(in.get_i64());
  diverged_ = in.get_u64() != 0;
  rng_.set_state(in.get_string());
  load_params(in);
  if (!in.at_end()) throw DataError("checkpoint: trailing bytes");
}

std::string Trainee::description() const {
  std::ostringstream out;
  out << spec_.task_id << " (" << to_string(spec_.family) << "): " << family_details()
      << ", lr0 in [" << spec_.min_lr0 << ", " << spec_.max_lr0 << "], noise "
      << spec_.default_noise << ", " << spec_.steps_per_epoch << " steps/epoch";
  return out.str();
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticProblem make_quadratic_problem(const TaskSpec& spec) {
  const int d = spec.dataset_size;
  Rng rng(spec.seed);
  Eigen::MatrixXd gaussian(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) gaussian(i, j) = rng.normal();
  }
  QuadraticProblem p;
  p.basis = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian).householderQ();
  p.eigenvalues.resize(d);
  for (int i = 0; i < d; ++i) {
    const double frac = d > 1 ? static_cast<double>(i) / (d - 1) : 0.0;
    p.eigenvalues[i] = QuadraticProblem::kMaxEigenvalue *
                       std::pow(QuadraticProblem::kMinEigenvalue / QuadraticProblem::kMaxEigenvalue, frac);
  }
  p.hessian = p.basis * p.eigenvalues.asDiagonal() * p.basis.transpose();
  p.hessian = 0.5 * (p.hessian + p.hessian.transpose()).eval();
  p.optimum.resize(d);
  p.val_target.resize(d);
  for (int i = 0; i < d; ++i) p.optimum[i] = rng.normal();
  for (int i = 0; i < d; ++i) p.val_target[i] = p.optimum[i] + 0.05 * rng.normal();
  return p;
}

QuadraticTrainee::QuadraticTrainee(const TaskSpec& spec, std::uint64_t run_seed)
    : Trainee(spec, run_seed), problem_(make_quadratic_problem(spec)) {
  Rng init(mix_seed(run_seed, 0xA11CE));
  Eigen::VectorXd offset(problem_.optimum.size());
  for (Eigen::Index i = 0; i < offset.size(); ++i) offset[i] = init.normal();
  coords_ = problem_.basis.transpose() * offset;
  val_offset_ = problem_.basis.transpose() * (problem_.val_target - problem_.optimum);
  finish_init();
}

// Isotropic gradient noise has the same law in any orthonormal basis.
double QuadraticTrainee::step(double lr) {
  Eigen::VectorXd grad = problem_.eigenvalues.cwiseProduct(coords_);
  const double loss = 0.5 * coords_.dot(grad);
  add_gradient_noise(grad);
  coords_ -= lr * grad;
  return loss;
}

double QuadraticTrainee::compute_val_loss() const {
  const Eigen::VectorXd e = coords_ - val_offset_;
  return 0.5 * e.dot(problem_.eigenvalues.cwiseProduct(e));
}

void QuadraticTrainee::save_params(ByteWriter& out) const { write_vector(out, coords_); }
void QuadraticTrainee::load_params(ByteReader& in) { read_vector(in, coords_); }

std::string QuadraticTrainee::family_details() const {
  std::ostringstream out;
  out << "dim " << coords_.size() << ", eigenvalues in [" << QuadraticProblem::kMinEigenvalue << ", "
      << QuadraticProblem::kMaxEigenvalue << "]";
  return out.str();
}

// ---------------------------------------------------------------------------
// Logistic regression

namespace {

ClassificationData make_blobs(Rng& rng, const Eigen::VectorXd& mean, int count) {
  ClassificationData data{Eigen::MatrixXd(count, mean.size()), Eigen::VectorXd(count)};
  for (int i = 0; i < count; ++i) {
    const bool positive = rng.below(2) == 1;
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
      data.features(i, j) = (positive ? 1.0 : -1.0) * mean[j] + rng.normal();
    }
    const bool flip = rng.uniform() < 0.05;
    data.labels[i] = (positive != flip) ? 1.0 : 0.0;
  }
  return data;
}

double mean_bce(const Eigen::VectorXd& logits, const Eigen::VectorXd& labels) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) sum += softplus(logits[i]) - labels[i] * logits[i];
  return sum / static_cast<double>(logits.size());
}

}  // namespace

LogisticTrainee::LogisticTrainee(const TaskSpec& spec, std::uint64_t run_seed) : Trainee(spec, run_seed) {
  Rng data_rng(spec.seed);
  Eigen::VectorXd mean(kFeatures);
  for (int j = 0; j < kFeatures; ++j) mean[j] = data_rng.normal();
  mean *= 0.75 / mean.norm();
  train_ = make_blobs(data_rng, mean, spec.dataset_size);
  val_ = make_blobs(data_rng, mean, std::max(1, spec.dataset_size / 2));

  Rng init(mix_seed(run_seed, 0xA11CE));
  params_.resize(kFeatures + 1);
  for (Eigen::Index i = 0; i < params_.size(); ++i) params_[i] = 0.1 * init.normal();
  finish_init();
}

LossGrad LogisticTrainee::loss_and_grad(const Eigen::VectorXd& params, const ClassificationData& data,
                                        std::span<const int> rows) {
  const auto d = data.features.cols();
  const auto w = params.head(d);
  const double b = params[d];
  LossGrad out{0.0, Eigen::VectorXd::Zero(params.size())};
  for (int r : rows) {
    const double z = data.features.row(r).dot(w) + b;
    const double y = data.labels[r];
    out.loss += softplus(z) - y * z;
    const double dz = sigmoid(z) - y;
    out.grad.head(d) += dz * data.features.row(r).transpose();
    out.grad[d] += dz;
  }
  const double m = static_cast<double>(rows.size());
  out.loss = out.loss / m + 0.5 * kL2 * w.squaredNorm();
  out.grad /= m;
  out.grad.head(d) += kL2 * w;
  return out;
}

double LogisticTrainee::step(double lr) {
  const auto rows = sample_rows(rng(), train_.features.rows(), spec().batch_size);
  LossGrad lg = loss_and_grad(params_, train_, rows);
  add_gradient_noise(lg.grad);
  params_ -= lr * lg.grad;
  return lg.loss;
}

double LogisticTrainee::compute_val_loss() const {
  const auto d = val_.features.cols();
  const Eigen::VectorXd logits = (val_.features * params_.head(d)).array() + params_[d];
  return mean_bce(logits, val_.labels);
}

void LogisticTrainee::save_params(ByteWriter& out) const { write_vector(out, params_); }
void LogisticTrainee::load_params(ByteReader& in) { read_vector(in, params_); }

std::string LogisticTrainee::family_details() const {
  std::ostringstream out;
  out << kFeatures << " features, " << train_.features.rows() << " train / " << val_.features.rows()
      << " val examples, batch " << spec().batch_size;
  return out.str();
}

// ---------------------------------------------------------------------------
// MLP

namespace {

ClassificationData make_moons(Rng& rng, int count) {
  ClassificationData data{Eigen::MatrixXd(count, 2), Eigen::VectorXd(count)};
  for (int i = 0; i < count; ++i) {
    const bool upper = rng.below(2) == 0;
    const double t = rng.uniform(0.0, std::numbers::pi);
    const double x = upper ? std::cos(t) : 1.0 - std::cos(t);
    const double y = upper ? std::sin(t) : 0.5 - std::sin(t);
    data.features(i, 0) = x + 0.15 * rng.normal();
    data.features(i, 1) = y + 0.15 * rng.normal();
    data.labels[i] = upper ? 0.0 : 1.0;
  }
  return data;
}

ClassificationData make_rings(Rng& rng, int count) {
  ClassificationData data{Eigen::MatrixXd(count, 2), Eigen::VectorXd(count)};
  for (int i = 0; i < count; ++i) {
    const bool outer = rng.below(2) == 1;
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double radius = outer ? 1.0 : 0.45;
    data.features(i, 0) = radius * std::cos(angle) + 0.12 * rng.normal();
    data.features(i, 1) = radius * std::sin(angle) + 0.12 * rng.normal();
    data.labels[i] = outer ? 1.0 : 0.0;
  }
  return data;
}

}  // namespace

MlpTrainee::MlpTrainee(const TaskSpec& spec, std::uint64_t run_seed) : Trainee(spec, run_seed) {
  Rng data_rng(spec.seed);
  const bool rings = spec.family == TaskFamily::kMlpRings;
  const int n_val = std::max(1, spec.dataset_size / 2);
  train_ = rings ? make_rings(data_rng, spec.dataset_size) : make_moons(data_rng, spec.dataset_size);
  val_ = rings ? make_rings(data_rng, n_val) : make_moons(data_rng, n_val);

  const int h = spec.hidden;
  Rng init(mix_seed(run_seed, 0xA11CE));
  params_ = Eigen::VectorXd::Zero(4 * h + 1);
  const double b1 = 1.0 / std::sqrt(2.0);
  const double b2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (int i = 0; i < 2 * h; ++i) params_[i] = init.uniform(-b1, b1);
  for (int i = 0; i < h; ++i) params_[3 * h + i] = init.uniform(-b2, b2);
  finish_init();
}

LossGrad MlpTrainee::loss_and_grad(const Eigen::VectorXd& params, int hidden,
                                   const ClassificationData& data, std::span<const int> rows) {
  const int h = hidden;
  LossGrad out{0.0, Eigen::VectorXd::Zero(params.size())};
  Eigen::VectorXd act(h);
  for (int r : rows) {
    const double x0 = data.features(r, 0);
    const double x1 = data.features(r, 1);
    double z = params[4 * h];
    for (int k = 0; k < h; ++k) {
      act[k] = std::tanh(params[2 * k] * x0 + params[2 * k + 1] * x1 + params[2 * h + k]);
      z += params[3 * h + k] * act[k];
    }
    const double y = data.labels[r];
    out.loss += softplus(z) - y * z;
    const double dz = sigmoid(z) - y;
    out.grad[4 * h] += dz;
    for (int k = 0; k < h; ++k) {
      out.grad[3 * h + k] += dz * act[k];
      const double dpre = dz * params[3 * h + k] * (1.0 - act[k] * act[k]);
      out.grad[2 * k] += dpre * x0;
      out.grad[2 * k + 1] += dpre * x1;
      out.grad[2 * h + k] += dpre;
    }
  }
  const double m = static_cast<double>(rows.size());
  out.loss /= m;
  out.grad /= m;
  return out;
}

double MlpTrainee::step(double lr) {
  const auto rows = sample_rows(rng(), train_.features.rows(), spec().batch_size);
  LossGrad lg = loss_and_grad(params_, spec().hidden, train_, rows);
  add_gradient_noise(lg.grad);
  params_ -= lr * lg.grad;
  return lg.loss;
}

double MlpTrainee::compute_val_loss() const {
  const auto rows = all_rows(val_.features.rows());
  return loss_and_grad(params_, spec().hidden, val_, rows).loss;
}

void MlpTrainee::save_params(ByteWriter& out) const { write_vector(out, params_); }
void MlpTrainee::load_params(ByteReader& in) { read_vector(in, params_); }

std::string MlpTrainee::family_details() const {
  std::ostringstream out;
  out << "hidden " << spec().hidden << ", " << train_.features.rows() << " train / "
      << val_.features.rows() << " val examples, batch " << spec().batch_size;
  return out.str();
}

// ---------------------------------------------------------------------------

std::unique_ptr<Trainee> make_trainee(const TaskSpec& spec, std::uint64_t run_seed) {
  switch (spec.family) {
    case TaskFamily::kQuadratic: return std::make_unique<QuadraticTrainee>(spec, run_seed);
    case TaskFamily::kLogistic: return std::make_unique<LogisticTrainee>(spec, run_seed);
    case TaskFamily::kMlpMoons:
    case TaskFamily::kMlpRings: return std::make_unique<MlpTrainee>(spec, run_seed);
  }
  throw UsageError("make_trainee: unknown family");
}

const std::vector<TaskSpec>& builtin_tasks() {
  static const std::vector<TaskSpec> tasks = [] {
    std::vector<TaskSpec> t;
    TaskSpec quad;
    quad.task_id = "quadratic";
    quad.family = TaskFamily::kQuadratic;
    quad.min_lr0 = 1e-3;
    quad.max_lr0 = 1.2;
    quad.default_noise = 0.05;
    quad.dataset_size = 20;
    quad.seed = 101;
    t.push_back(quad);

    TaskSpec logistic;
    logistic.task_id = "logistic";
    logistic.family = TaskFamily::kLogistic;
    logistic.min_lr0 = 1e-3;
    logistic.max_lr0 = 3.0;
    logistic.default_noise = 0.0;
    logistic.dataset_size = 512;
    logistic.seed = 202;
    logistic.batch_size = 32;
    t.push_back(logistic);

    TaskSpec mlp;
    mlp.task_id = "mlp";
    mlp.family = TaskFamily::kMlpMoons;
    mlp.min_lr0 = 1e-3;
    mlp.max_lr0 = 2.0;
    mlp.default_noise = 0.0;
    mlp.dataset_size = 512;
    mlp.seed = 303;
    mlp.batch_size = 16;
    mlp.hidden = 16;
    t.push_back(mlp);

    TaskSpec holdout;
    holdout.task_id = "mlp_rings";
    holdout.family = TaskFamily::kMlpRings;
    holdout.min_lr0 = 0.05;  // below this the net sits on the ln 2 plateau for the whole horizon
    holdout.max_lr0 = 2.0;
    holdout.default_noise = 0.0;
    holdout.dataset_size = 512;
    holdout.seed = 404;
    holdout.batch_size = 16;
    holdout.hidden = 24;
    t.push_back(holdout);
    return t;
  }();
  return tasks;
}

const TaskSpec& find_task(std::string_view task_id) {
  for (const auto& t : builtin_tasks()) {
    if (t.task_id == task_id) return t;
  }
  throw UsageError("unknown task id '" + std::string(task_id) + "'");
}

}  // namespace arc
