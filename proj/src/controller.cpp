// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "arc/errors.hpp"
#include "arc/rng.hpp"

namespace arc {

using nn::Matrix;

int ControllerArch::conv1_length() const {
  if (input_length < conv1_kernel) return 0;
  return (input_length - conv1_kernel) / conv1_stride + 1;
}

int ControllerArch::conv2_length() const {
  const int len = conv1_length();
  if (len < conv2_kernel) return 0;
  return (len - conv2_kernel) / conv2_stride + 1;
}

void ControllerArch::validate() const {
  for (int v : {input_channels, input_length, conv1_channels, conv1_kernel, conv1_stride,
                conv2_channels, conv2_kernel, conv2_stride, rnn_hidden, dense_hidden, classes}) {
    if (v <= 0) throw UsageError("controller architecture: sizes must be positive");
  }
  if (input_channels != static_cast<int>(kNumChannels) ||
      input_length != static_cast<int>(kWindowLength) ||
      classes != static_cast<int>(kNumDecisions)) {
    throw UsageError("controller architecture: input must be 3x300 with 3 classes");
  }
  if (conv2_length() <= 0) throw UsageError("controller architecture: input too short");
}

ControllerWeights::ControllerWeights(const ControllerArch& a, std::uint64_t s)
    : arch(a),
      seed(s),
      conv1(a.input_channels, a.conv1_channels, a.conv1_kernel, a.conv1_stride),
      conv2(a.conv1_channels, a.conv2_channels, a.conv2_kernel, a.conv2_stride),
      rnn1(a.conv2_channels, a.rnn_hidden),
      rnn2(a.rnn_hidden, a.rnn_hidden),
      dense1(a.rnn_hidden, a.dense_hidden),
      dense2(a.dense_hidden, a.classes) {
  arch.validate();
  if (param_count() >= kMaxControllerParams) {
    throw UsageError("controller architecture exceeds the parameter budget: " +
                     std::to_string(param_count()) + " >= " +
                     std::to_string(kMaxControllerParams));
  }
}

std::size_t ControllerWeights::param_count() const {
  std::size_t total = 0;
  for_each_block([&](const std::string&, const Matrix& m) { total += static_cast<std::size_t>(m.size()); });
  return total;
}

void ControllerWeights::set_zero() {
  for_each_block([](const std::string&, Matrix& m) { m.setZero(); });
}

ControllerWeights ControllerWeights::initialize(const ControllerArch& arch, std::uint64_t seed) {
  ControllerWeights w(arch, seed);
  Rng rng(seed);
  auto fill = [&](Matrix& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  };
  fill(w.conv1.weight, w.conv1.in_channels * w.conv1.kernel);
  fill(w.conv2.weight, w.conv2.in_channels * w.conv2.kernel);
  fill(w.rnn1.weight_x, w.rnn1.hidden_size);
  fill(w.rnn1.weight_h, w.rnn1.hidden_size);
  fill(w.rnn2.weight_x, w.rnn2.hidden_size);
  fill(w.rnn2.weight_h, w.rnn2.hidden_size);
  fill(w.dense1.weight, w.dense1.in_features);
  fill(w.dense2.weight, w.dense2.in_features);
  return w;
}

namespace {

struct NetCache {
  nn::Conv1dCache conv1, conv2;
  Matrix act1, act2;
  nn::LstmCache rnn1, rnn2;
  nn::DenseCache dense1, dense2;
  Matrix act3;
  int batch = 0;
};

Matrix pack_input(std::span<const FeatureWindow> batch) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  Matrix x(static_cast<Eigen::Index>(kWindowLength) * b, static_cast<Eigen::Index>(kNumChannels));
  for (Eigen::Index s = 0; s < b; ++s) {
    const auto& w = batch[static_cast<std::size_t>(s)];
    for (std::size_t t = 0; t < kWindowLength; ++t) {
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        x(static_cast<Eigen::Index>(t) * b + s, static_cast<Eigen::Index>(c)) = w.channels[c][t];
      }
    }
  }
  return x;
}

Matrix logits(const ControllerWeights& w, std::span<const FeatureWindow> batch, NetCache* cache) {
  if (batch.empty()) throw UsageError("controller: empty batch");
  for (const auto& win : batch) {
    if (!win.all_finite()) throw UsageError("controller: window contains non-finite values");
  }
  const int b = static_cast<int>(batch.size());
  NetCache local;
  NetCache& c = cache ? *cache : local;
  const bool keep = cache != nullptr;
  c.batch = b;

  Matrix x = pack_input(batch);
  c.act1 = nn::forward(w.conv1, x, b, keep ? &c.conv1 : nullptr);
  nn::relu_inplace(c.act1);
  nn::check_finite(c.act1, "conv1");
  c.act2 = nn::forward(w.conv2, c.act1, b, keep ? &c.conv2 : nullptr);
  nn::relu_inplace(c.act2);
  nn::check_finite(c.act2, "conv2");
  Matrix h1 = nn::forward(w.rnn1, c.act2, b, keep ? &c.rnn1 : nullptr);
  nn::check_finite(h1, "rnn1");
  Matrix h2 = nn::forward(w.rnn2, h1, b, keep ? &c.rnn2 : nullptr);
  nn::check_finite(h2, "rnn2");
  const Matrix last = h2.bottomRows(b);
  c.act3 = nn::forward(w.dense1, last, keep ? &c.dense1 : nullptr);
  nn::relu_inplace(c.act3);
  nn::check_finite(c.act3, "dense1");
  Matrix z = nn::forward(w.dense2, c.act3, keep ? &c.dense2 : nullptr);
  nn::check_finite(z, "dense2");
  return z;
}

Matrix softmax_rows(const Matrix& z) {
  Matrix p(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    p.row(i) = (z.row(i).array() - mx).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

void require_finite_weights(const ControllerWeights& w, const char* what) {
  w.for_each_block([&](const std::string& name, const Matrix& m) {
    if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite value in " + name);
  });
}

}  // namespace

Tensor forward(const ControllerWeights& weights, std::span<const FeatureWindow> batch) {
  const Matrix p = softmax_rows(logits(weights, batch, nullptr));
  Tensor out({static_cast<std::size_t>(p.rows()), kNumDecisions});
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = p(i, j);
    }
  }
  return out;
}

LossAndGrad loss_and_grad(const ControllerWeights& weights, std::span<const FeatureWindow> batch,
                          std::span<const LrDecision> labels) {
  if (batch.size() != labels.size()) throw UsageError("loss_and_grad: batch/label size mismatch");
  NetCache cache;
  const Matrix z = logits(weights, batch, &cache);
  const int b = cache.batch;

  LossAndGrad out{0.0, ControllerWeights(weights.arch, weights.seed), softmax_rows(z)};
  Matrix d_z = out.probabilities;
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    const auto y = static_cast<Eigen::Index>(index_of(labels[static_cast<std::size_t>(i)]));
    const double mx = z.row(i).maxCoeff();
    const double log_sum = mx + std::log((z.row(i).array() - mx).exp().sum());
    loss -= z(i, y) - log_sum;
    d_z(i, y) -= 1.0;
  }
  out.loss = loss / b;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite value in layer 'loss'");
  d_z /= static_cast<double>(b);

  auto& g = out.grads;
  Matrix d = nn::backward(weights.dense2, cache.dense2, d_z, g.dense2);
  nn::relu_backward_inplace(cache.act3, d);
  d = nn::backward(weights.dense1, cache.dense1, d, g.dense1);
  nn::check_finite(d, "dense1");

  Matrix d_h2 = Matrix::Zero(cache.rnn2.hidden.rows(), cache.rnn2.hidden.cols());
  d_h2.bottomRows(b) = d;
  Matrix d_h1 = nn::backward(weights.rnn2, cache.rnn2, d_h2, g.rnn2);
  nn::check_finite(d_h1, "rnn2");
  Matrix d_a2 = nn::backward(weights.rnn1, cache.rnn1, d_h1, g.rnn1);
  nn::check_finite(d_a2, "rnn1");
  nn::relu_backward_inplace(cache.act2, d_a2);
  Matrix d_a1 = nn::backward(weights.conv2, cache.conv2, d_a2, g.conv2);
  nn::check_finite(d_a1, "conv2");
  nn::relu_backward_inplace(cache.act1, d_a1);
  nn::backward(weights.conv1, cache.conv1, d_a1, g.conv1);
  require_finite_weights(g, "gradient");
  return out;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw UsageError("train config: lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw UsageError("train config: betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw UsageError("train config: epsilon must be positive");
  if (batch_size <= 0 || epochs <= 0) throw UsageError("train config: batch_size and epochs must be positive");
  if (!(split > 0.0 && split < 1.0)) throw UsageError("train config: split must lie in (0, 1)");
  arch.validate();
}

AdamState::AdamState(const ControllerWeights& like)
    : m(like.arch, like.seed), v(like.arch, like.seed) {}

void adam_step(ControllerWeights& weights, const ControllerWeights& grads, AdamState& state,
               const TrainConfig& config) {
  if (!(weights.arch == grads.arch) || !(weights.arch == state.m.arch)) {
    throw UsageError("adam_step: structure mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);

  std::vector<const Matrix*> g_blocks;
  grads.for_each_block([&](const std::string&, const Matrix& g) { g_blocks.push_back(&g); });
  std::vector<Matrix*> m_blocks;
  std::vector<Matrix*> v_blocks;
  state.m.for_each_block([&](const std::string&, Matrix& m) { m_blocks.push_back(&m); });
  state.v.for_each_block([&](const std::string&, Matrix& v) { v_blocks.push_back(&v); });

  std::size_t k = 0;
  weights.for_each_block([&](const std::string& name, Matrix& w) {
    const auto g = g_blocks[k]->array();
    auto m = m_blocks[k]->array();
    auto v = v_blocks[k]->array();
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.square();
    w.array() -= config.lr * (m / correction1) / ((v / correction2).sqrt() + config.epsilon);
    if (!w.allFinite()) throw NumericError("adam_step: non-finite parameter in " + name);
    ++k;
  });
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts) {
    for (auto c : row) sum += c;
  }
  return sum;
}

RewardPenaltyMatrix RewardPenaltyMatrix::standard() {
  return RewardPenaltyMatrix{{{{+3, -1, -3}, {-1, +1, -1}, {-3, -1, +3}}}};
}

double weighted_accuracy(const ConfusionMatrix& cm, const RewardPenaltyMatrix& rpm) {
  if (cm.total() <= 0) throw UsageError("weighted_accuracy: empty confusion matrix");
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i = 0; i < kNumDecisions; ++i) {
    for (std::size_t j = 0; j < kNumDecisions; ++j) {
      if (cm.counts[i][j] < 0) throw DataError("weighted_accuracy: negative count");
      const double mass = static_cast<double>(cm.counts[i][j]) * std::abs(rpm.values[i][j]);
      denominator += mass;
      if (i == j) numerator += mass;
    }
  }
  if (denominator == 0.0) throw UsageError("weighted_accuracy: zero-weight confusion matrix");
  return numerator / denominator;
}

LrDecision decision_from_probabilities(std::span<const double> probabilities) {
  if (probabilities.size() != kNumDecisions) throw UsageError("expected 3 class probabilities");
  LrDecision best = kTieBreakOrder[0];
  for (LrDecision d : kTieBreakOrder) {
    if (probabilities[index_of(d)] > probabilities[index_of(best)]) best = d;
  }
  return best;
}

std::vector<LrDecision> predict_batch(const ControllerWeights& weights,
                                      std::span<const FeatureWindow> windows) {
  std::vector<LrDecision> out;
  out.reserve(windows.size());
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < windows.size(); start += kChunk) {
    const auto chunk = windows.subspan(start, std::min(kChunk, windows.size() - start));
    const Tensor p = forward(weights, chunk);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const std::array<double, kNumDecisions> row = {p.at(i, 0), p.at(i, 1), p.at(i, 2)};
      out.push_back(decision_from_probabilities(row));
    }
  }
  return out;
}

LrDecision predict(const ControllerWeights& weights, const FeatureWindow& window) {
  return predict_batch(weights, std::span<const FeatureWindow>(&window, 1)).front();
}

ConfusionMatrix evaluate(const ControllerWeights& weights, std::span<const Sample> samples,
                         std::span<const std::size_t> indices) {
  std::vector<FeatureWindow> windows;
  windows.reserve(indices.size());
  for (auto i : indices) windows.push_back(samples[i].window);
  const auto predicted = predict_batch(weights, windows);
  ConfusionMatrix cm;
  for (std::size_t k = 0; k < indices.size(); ++k) cm.add(predicted[k], samples[indices[k]].label);
  return cm;
}

ConfusionMatrix evaluate(const ControllerWeights& weights, std::span<const Sample> samples) {
  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return evaluate(weights, samples, all);
}

DatasetSplit split_dataset(std::size_t count, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("split fraction must lie in (0, 1)");
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order, rng);
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count)));
  DatasetSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

Baseline majority_baseline(std::span<const Sample> samples, std::span<const std::size_t> indices) {
  std::array<std::int64_t, kNumDecisions> counts{};
  for (auto i : indices) {
    if (i >= samples.size()) throw UsageError("majority_baseline: index out of range");
    ++counts[index_of(samples[i].label)];
  }
  Baseline b;
  std::int64_t best = -1;
  for (LrDecision d : kTieBreakOrder) {
    if (counts[index_of(d)] > best) {
      best = counts[index_of(d)];
      b.decision = d;
    }
  }
  ConfusionMatrix cm;
  for (auto i : indices) cm.add(b.decision, samples[i].label);
  b.weighted_accuracy = weighted_accuracy(cm);
  return b;
}

Baseline majority_baseline(std::span<const Sample> samples) {
  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return majority_baseline(samples, all);
}

DatasetSplit training_split(std::size_t count, const TrainConfig& config) {
  return split_dataset(count, config.split, mix_seed(config.seed, 1));
}

TrainResult train_controller(std::span<const Sample> dataset, const TrainConfig& config,
                             const EpochCallback& on_epoch) {
  config.validate();
  std::array<std::size_t, kNumDecisions> class_counts{};
  for (const auto& s : dataset) ++class_counts[index_of(s.label)];
  for (LrDecision d : kAllDecisions) {
    if (class_counts[index_of(d)] == 0) {
      throw DataError("train_controller: class " + std::string(to_string(d)) + " absent from dataset");
    }
    if (class_counts[index_of(d)] < 10) {
      throw DataError("train_controller: class " + std::string(to_string(d)) +
                      " has fewer than 10 samples");
    }
  }

  TrainResult result{ControllerWeights::initialize(config.arch, mix_seed(config.seed, 2)), -1, -1.0,
                     {}, training_split(dataset.size(), config)};
  if (result.split.train.empty() || result.split.validation.empty()) {
    throw DataError("train_controller: dataset too small to split");
  }

  ControllerWeights weights = result.weights;
  AdamState adam(weights);
  Rng order_rng(mix_seed(config.seed, 3));
  std::vector<std::size_t> order = result.split.train;
  std::vector<FeatureWindow> batch;
  std::vector<LrDecision> labels;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, order_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      labels.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(dataset[order[k]].window);
        labels.push_back(dataset[order[k]].label);
      }
      const LossAndGrad lg = loss_and_grad(weights, batch, labels);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto row = lg.probabilities.row(static_cast<Eigen::Index>(i));
        const std::array<double, kNumDecisions> p = {row(0), row(1), row(2)};
        if (decision_from_probabilities(p) == labels[i]) ++correct;
      }
      adam_step(weights, lg.grads, adam, config);
    }

    const ConfusionMatrix cm = evaluate(weights, dataset, result.split.validation);
    EpochLog entry{epoch, loss_sum / static_cast<double>(order.size()),
                   static_cast<double>(correct) / static_cast<double>(order.size()),
                   weighted_accuracy(cm)};
    if (entry.val_weighted_accuracy > result.best_val_weighted_accuracy) {
      result.best_val_weighted_accuracy = entry.val_weighted_accuracy;
      result.best_epoch = epoch;
      result.weights = weights;
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return result;
}

namespace {

constexpr std::array<char, 4> kWeightsMagic = {'A', 'R', 'C', 'W'};

std::array<int, 11> arch_fields(const ControllerArch& a) {
  return {a.input_channels, a.input_length, a.conv1_channels, a.conv1_kernel, a.conv1_stride,
          a.conv2_channels, a.conv2_kernel, a.conv2_stride,   a.rnn_hidden,   a.dense_hidden,
          a.classes};
}

}  // namespace

Bytes encode_weights(const ControllerWeights& weights) {
  ByteWriter out;
  out.put_raw(std::span(reinterpret_cast<const std::uint8_t*>(kWeightsMagic.data()), kWeightsMagic.size()));
  out.put_u32(kWeightsFormatVersion);
  const auto fields = arch_fields(weights.arch);
  out.put_u32(static_cast<std::uint32_t>(fields.size()));
  for (int f : fields) out.put_i64(f);
  out.put_u64(weights.param_count());
  out.put_u64(weights.seed);
  std::uint32_t blocks = 0;
  weights.for_each_block([&](const std::string&, const Matrix&) { ++blocks; });
  out.put_u32(blocks);
  weights.for_each_block([&](const std::string& name, const Matrix& m) {
    out.put_string(name);
    out.put_u64(static_cast<std::uint64_t>(m.rows()));
    out.put_u64(static_cast<std::uint64_t>(m.cols()));
    out.put_f64s(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
  });
  Bytes bytes = out.take();
  ByteWriter tail;
  tail.put_u64(fnv1a64(bytes));
  bytes.insert(bytes.end(), tail.bytes().begin(), tail.bytes().end());
  return bytes;
}

ControllerWeights decode_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw DataError("weights: file too short");
  const auto body = bytes.first(bytes.size() - 8);
  ByteReader trailer(bytes.last(8));
  if (trailer.get_u64() != fnv1a64(body)) throw DataError("weights: checksum mismatch");

  ByteReader in(body);
  const auto magic = in.get_raw(4);
  if (!std::equal(magic.begin(), magic.end(), kWeightsMagic.begin())) {
    throw DataError("weights: bad magic");
  }
  const auto version = in.get_u32();
  if (version != kWeightsFormatVersion) {
    throw DataError("weights: unsupported format version " + std::to_string(version));
  }
  const auto n_fields = in.get_u32();
  ControllerArch arch;
  if (n_fields != arch_fields(arch).size()) throw DataError("weights: unexpected architecture fields");
  std::array<int, 11> f{};
  for (auto& v : f) v = static_cast<int>(in.get_i64());
  arch = ControllerArch{f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9], f[10]};
  const auto param_count = in.get_u64();
  const auto seed = in.get_u64();
  ControllerWeights weights(arch, seed);
  if (param_count != weights.param_count()) throw DataError("weights: parameter count mismatch");
  std::uint32_t expected_blocks = 0;
  weights.for_each_block([&](const std::string&, const Matrix&) { ++expected_blocks; });
  if (in.get_u32() != expected_blocks) throw DataError("weights: block count mismatch");
  weights.for_each_block([&](const std::string& name, Matrix& m) {
    if (in.get_string() != name) throw DataError("weights: unexpected block, wanted " + name);
    const auto rows = in.get_u64();
    const auto cols = in.get_u64();
    if (rows != static_cast<std::uint64_t>(m.rows()) || cols != static_cast<std::uint64_t>(m.cols())) {
      throw DataError("weights: shape mismatch in " + name);
    }
    in.get_f64s_into(std::span<double>(m.data(), static_cast<std::size_t>(m.size())));
  });
  if (!in.at_end()) throw DataError("weights: trailing bytes");
  return weights;
}

void save_weights(const std::filesystem::path& path, const ControllerWeights& weights) {
  const Bytes bytes = encode_weights(weights);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write weights file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw UsageError("failed writing weights file " + path.string());
}

ControllerWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open weights file " + path.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_weights(bytes);
}

}  // namespace arc
