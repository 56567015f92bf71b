// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace arc {

inline constexpr std::size_t kWindowLength = 300;
inline constexpr std::size_t kNumChannels = 3;

// One epoch of raw training signal.
struct HistoryRecord {
  int epoch_index = 0;
  double train_loss = 0.0;  // mean of the step losses within the epoch
  double val_loss = 0.0;    // end-of-epoch validation loss
  double lr = 0.0;          // learning rate in force during the epoch
};

enum class Channel : std::size_t { kTrainLoss = 0, kValLoss = 1, kLr = 2 };

// Fixed-size controller input: train loss, val loss and LR, each resampled to
// kWindowLength points.
struct FeatureWindow {
  using Series = std::array<double, kWindowLength>;
  std::array<Series, kNumChannels> channels{};

  Series& operator[](Channel c) { return channels[static_cast<std::size_t>(c)]; }
  const Series& operator[](Channel c) const { return channels[static_cast<std::size_t>(c)]; }

  bool all_finite() const;
  bool operator==(const FeatureWindow&) const = default;
};

// (x - mean) / population stddev. A constant series maps to all zeros.
std::vector<double> zscore(std::span<const double> series);

// Divides every entry by the first one, so the result starts at exactly 1.0.
std::vector<double> normalize_lr(std::span<const double> series);

// Nearest-index resampling: output i takes input floor((i + 0.5) * len / target_len).
std::vector<double> resize_nearest(std::span<const double> series, std::size_t target_len);

// Builds the controller input at `current_epoch` (number of completed epochs)
// for segment length n. The history must reach epoch current_epoch - 1. Uses
// the last min(3n, current_epoch) epochs, normalizes each channel over that
// slice, left-pads with zeros to 3n and resamples to kWindowLength.
FeatureWindow build_feature_window(std::span<const HistoryRecord> history, int n,
                                   int current_epoch);

}  // namespace arc
