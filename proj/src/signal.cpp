// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "arc/errors.hpp"

namespace arc {
namespace {

void require_finite(std::span<const double> series, const char* what) {
  for (double v : series) {
    if (!std::isfinite(v)) throw DataError(std::string(what) + ": non-finite value");
  }
}

}  // namespace

bool FeatureWindow::all_finite() const {
  for (const auto& ch : channels) {
    for (double v : ch) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::vector<double> zscore(std::span<const double> series) {
  if (series.empty()) throw UsageError("zscore: empty series");
  require_finite(series, "zscore");

  std::vector<double> out(series.size(), 0.0);
  const bool constant = std::all_of(series.begin(), series.end(),
                                    [&](double v) { return v == series.front(); });
  if (constant) return out;

  const auto n = static_cast<double>(series.size());
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (sd == 0.0) return out;
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - mean) / sd;
  return out;
}

std::vector<double> normalize_lr(std::span<const double> series) {
  if (series.empty()) throw UsageError("normalize_lr: empty series");
  require_finite(series, "normalize_lr");
  const double first = series.front();
  if (!(first > 0.0)) throw DataError("normalize_lr: first value must be positive");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] / first;
  return out;
}

std::vector<double> resize_nearest(std::span<const double> series, std::size_t target_len) {
  if (series.empty()) throw UsageError("resize_nearest: empty series");
  if (target_len == 0) throw UsageError("resize_nearest: target length must be positive");
  const std::size_t len = series.size();
  std::vector<double> out(target_len);
  for (std::size_t i = 0; i < target_len; ++i) {
    // floor((i + 0.5) * len / target_len) in exact integer arithmetic.
    const std::size_t src = std::min(((2 * i + 1) * len) / (2 * target_len), len - 1);
    out[i] = series[src];
  }
  return out;
}

FeatureWindow build_feature_window(std::span<const HistoryRecord> history, int n,
                                   int current_epoch) {
  if (n <= 0) throw UsageError("build_feature_window: n must be positive");
  if (current_epoch < n) throw UsageError("build_feature_window: current_epoch < n");

  // Records belonging to completed epochs [0, current_epoch).
  std::size_t end = 0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i > 0 && history[i].epoch_index <= history[i - 1].epoch_index) {
      throw DataError("build_feature_window: epoch indices not strictly increasing");
    }
    if (history[i].epoch_index < current_epoch) end = i + 1;
  }
  if (end < static_cast<std::size_t>(n)) {
    throw UsageError("build_feature_window: fewer than n epochs of history");
  }
  if (history[end - 1].epoch_index != current_epoch - 1) {
    throw UsageError("build_feature_window: history does not reach current_epoch");
  }

  const std::size_t span_len = 3 * static_cast<std::size_t>(n);
  const std::size_t take = std::min({span_len, static_cast<std::size_t>(current_epoch), end});
  const auto slice = history.subspan(end - take, take);

  std::vector<double> train(take), val(take), lr(take);
  for (std::size_t i = 0; i < take; ++i) {
    if (!(slice[i].lr > 0.0)) throw DataError("build_feature_window: lr must be positive");
    train[i] = slice[i].train_loss;
    val[i] = slice[i].val_loss;
    lr[i] = slice[i].lr;
  }

  const std::array<std::vector<double>, kNumChannels> normalized = {zscore(train), zscore(val),
                                                                    normalize_lr(lr)};
  FeatureWindow window;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    std::vector<double> padded(span_len - take, 0.0);
    padded.insert(padded.end(), normalized[c].begin(), normalized[c].end());
    const auto resized = resize_nearest(padded, kWindowLength);
    std::copy(resized.begin(), resized.end(), window.channels[c].begin());
  }
  return window;
}

}  // namespace arc
