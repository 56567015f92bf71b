// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// The learning-rate controller: conv -> conv -> LSTM -> LSTM -> dense -> dense
// over a FeatureWindow, producing probabilities for Decrease/Constant/Increase.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "arc/bytes.hpp"
#include "arc/decision.hpp"
#include "arc/layers.hpp"
#include "arc/sample.hpp"
#include "arc/signal.hpp"
#include "arc/tensor.hpp"

namespace arc {

inline constexpr std::size_t kMaxControllerParams = 80'000;

struct ControllerArch {
  int input_channels = static_cast<int>(kNumChannels);
  int input_length = static_cast<int>(kWindowLength);
  int conv1_channels = 16;
  int conv1_kernel = 5;
  int conv1_stride = 2;
  int conv2_channels = 32;
  int conv2_kernel = 5;
  int conv2_stride = 2;
  int rnn_hidden = 32;
  int dense_hidden = 16;
  int classes = static_cast<int>(kNumDecisions);

  int conv1_length() const;
  int conv2_length() const;
  // Throws UsageError on non-positive sizes or an input too short for the convolutions.
  void validate() const;
  bool operator==(const ControllerArch&) const = default;
};

// All trainable parameters. Also used as the gradient and Adam-moment container.
struct ControllerWeights {
  ControllerArch arch;
  std::uint64_t seed = 0;
  nn::Conv1d conv1;
  nn::Conv1d conv2;
  nn::Lstm rnn1;
  nn::Lstm rnn2;
  nn::Dense dense1;
  nn::Dense dense2;

  // Zero-filled weights of the given architecture. Asserts the parameter budget.
  explicit ControllerWeights(const ControllerArch& arch = {}, std::uint64_t seed = 0);

  // Uniform fan-in initialisation with zero biases.
  static ControllerWeights initialize(const ControllerArch& arch, std::uint64_t seed);

  std::size_t param_count() const;
  void set_zero();

  // Visits every parameter block in declared order as f(name, matrix).
  template <typename F>
  void for_each_block(F&& f) {
    visit_layer("conv1", conv1, f);
    visit_layer("conv2", conv2, f);
    visit_layer("rnn1", rnn1, f);
    visit_layer("rnn2", rnn2, f);
    visit_layer("dense1", dense1, f);
    visit_layer("dense2", dense2, f);
  }
  template <typename F>
  void for_each_block(F&& f) const {
    visit_layer("conv1", conv1, f);
    visit_layer("conv2", conv2, f);
    visit_layer("rnn1", rnn1, f);
    visit_layer("rnn2", rnn2, f);
    visit_layer("dense1", dense1, f);
    visit_layer("dense2", dense2, f);
  }

 private:
  template <typename Layer, typename F>
  static void visit_layer(const std::string& prefix, Layer& layer, F& f) {
    layer.for_each_param([&](const char* name, auto& m) { f(prefix + "." + name, m); });
  }
};

// Class probabilities, one row per window (batch x 3).
Tensor forward(const ControllerWeights& weights, std::span<const FeatureWindow> batch);

struct LossAndGrad {
  double loss = 0.0;
  ControllerWeights grads;
  nn::Matrix probabilities;  // batch x 3
};

// Mean categorical cross-entropy and its gradient for every parameter.
LossAndGrad loss_and_grad(const ControllerWeights& weights, std::span<const FeatureWindow> batch,
                          std::span<const LrDecision> labels);

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 128;
  int epochs = 300;
  double split = 0.7;
  std::uint64_t seed = 0;
  ControllerArch arch;

  void validate() const;
};

struct AdamState {
  ControllerWeights m;
  ControllerWeights v;
  std::int64_t step = 0;

  explicit AdamState(const ControllerWeights& like);
};

void adam_step(ControllerWeights& weights, const ControllerWeights& grads, AdamState& state,
               const TrainConfig& config);

// Rows are predicted decisions, columns actual decisions.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumDecisions>, kNumDecisions> counts{};

  void add(LrDecision predicted, LrDecision actual) {
    ++counts[index_of(predicted)][index_of(actual)];
  }
  std::int64_t total() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

struct RewardPenaltyMatrix {
  std::array<std::array<int, kNumDecisions>, kNumDecisions> values{};

  // Rewards correct calls (+3 for a direction, +1 for Constant), penalises
  // opposite-direction calls with -3 and any confusion involving Constant with -1.
  static RewardPenaltyMatrix standard();
};

// Reward-weighted correct mass over reward-weighted total mass, in [0, 1].
double weighted_accuracy(const ConfusionMatrix& cm,
                         const RewardPenaltyMatrix& rpm = RewardPenaltyMatrix::standard());

// Argmax with ties resolved toward Constant, then Decrease.
LrDecision decision_from_probabilities(std::span<const double> probabilities);

LrDecision predict(const ControllerWeights& weights, const FeatureWindow& window);
std::vector<LrDecision> predict_batch(const ControllerWeights& weights,
                                      std::span<const FeatureWindow> windows);

ConfusionMatrix evaluate(const ControllerWeights& weights, std::span<const Sample> samples,
                         std::span<const std::size_t> indices);
ConfusionMatrix evaluate(const ControllerWeights& weights, std::span<const Sample> samples);

struct Baseline {
  LrDecision decision = LrDecision::kConstant;
  double weighted_accuracy = 0.0;
};

// Always predicting the most frequent label of the evaluated samples (count
// ties resolved toward Constant, then Decrease).
Baseline majority_baseline(std::span<const Sample> samples, std::span<const std::size_t> indices);
Baseline majority_baseline(std::span<const Sample> samples);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Uniform random sample-level split; `fraction` of the samples go to train.
DatasetSplit split_dataset(std::size_t count, double fraction, std::uint64_t seed);

// The split train_controller uses for `config`.
DatasetSplit training_split(std::size_t count, const TrainConfig& config);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_weighted_accuracy = 0.0;
};

struct TrainResult {
  ControllerWeights weights;
  int best_epoch = -1;
  double best_val_weighted_accuracy = -1.0;
  std::vector<EpochLog> log;
  DatasetSplit split;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Adam on mean cross-entropy; keeps the weights with the highest validation
// weighted accuracy (earliest epoch on ties).
TrainResult train_controller(std::span<const Sample> dataset, const TrainConfig& config,
                             const EpochCallback& on_epoch = {});

// Binary weight file, little-endian:
//   "ARCW" | u32 version | u32 field count | i64 arch fields... | u64 param count
//   | u64 seed | u32 block count | per block: string name, u64 rows, u64 cols,
//   f64 array (row-major, length-prefixed) | u64 FNV-1a of all preceding bytes
inline constexpr std::uint32_t kWeightsFormatVersion = 1;

Bytes encode_weights(const ControllerWeights& weights);
ControllerWeights decode_weights(std::span<const std::uint8_t> bytes);
void save_weights(const std::filesystem::path& path, const ControllerWeights& weights);
ControllerWeights load_weights(const std::filesystem::path& path);

}  // namespace arc
