// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/signal.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "arc/errors.hpp"
#include "arc/rng.hpp"

namespace arc {
namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

std::vector<HistoryRecord> ramp_history(int epochs, double lr = 1e-3) {
  std::vector<HistoryRecord> h;
  for (int e = 0; e < epochs; ++e) {
    h.push_back({e, 2.0 / (1.0 + e), 2.5 / (1.0 + 0.5 * e), lr});
  }
  return h;
}

TEST(Zscore, HandComputedExample) {
  const std::vector<double> in{1, 2, 3};
  const auto out = zscore(in);
  const double z = std::sqrt(1.5);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_NEAR(out[0], -z, 1e-12);
  EXPECT_NEAR(out[1], 0.0, 1e-12);
  EXPECT_NEAR(out[2], z, 1e-12);
  EXPECT_NEAR(out[2], 1.2247, 1e-4);
}

TEST(Zscore, ConstantSeriesIsZero) {
  const std::vector<double> in{5, 5, 5};
  EXPECT_EQ(zscore(in), std::vector<double>(3, 0.0));
}

TEST(Zscore, SingleValueIsZero) {
  const std::vector<double> in{42.0};
  EXPECT_EQ(zscore(in), std::vector<double>{0.0});
}

TEST(Zscore, Errors) {
  EXPECT_THROW(zscore(std::vector<double>{}), UsageError);
  EXPECT_THROW(zscore(std::vector<double>{1.0, std::nan("")}), DataError);
  EXPECT_THROW(zscore(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}), DataError);
}

TEST(Zscore, RandomizedMomentsAndAffineInvariance) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t len = 2 + rng.below(400);
    std::vector<double> x(len);
    for (auto& v : x) v = rng.uniform(-50, 50);
    const auto z = zscore(x);
    EXPECT_LT(std::abs(mean_of(z)), 1e-9);
    EXPECT_LT(std::abs(pop_std(z) - 1.0), 1e-9);

    const double a = rng.uniform(0.01, 100), b = rng.uniform(-100, 100);
    std::vector<double> y(len);
    for (std::size_t i = 0; i < len; ++i) y[i] = a * x[i] + b;
    const auto zy = zscore(y);
    for (std::size_t i = 0; i < len; ++i) ASSERT_NEAR(zy[i], z[i], 1e-9);
  }
}

TEST(NormalizeLr, Examples) {
  auto out = normalize_lr(std::vector<double>{1e-3, 1.618e-3, 1e-3});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0], 1.0);
  EXPECT_NEAR(out[1], 1.618, 1e-12);
  EXPECT_NEAR(out[2], 1.0, 1e-12);

  EXPECT_EQ(normalize_lr(std::vector<double>{0.5}), std::vector<double>{1.0});

  out = normalize_lr(std::vector<double>{2e-4, 2e-4 * 0.618});
  EXPECT_EQ(out[0], 1.0);
  EXPECT_NEAR(out[1], 0.618, 1e-12);
}

TEST(NormalizeLr, Errors) {
  EXPECT_THROW(normalize_lr(std::vector<double>{0.0, 1.0}), DataError);
  EXPECT_THROW(normalize_lr(std::vector<double>{-1.0}), DataError);
  EXPECT_THROW(normalize_lr(std::vector<double>{}), UsageError);
}

TEST(NormalizeLr, ScaleInvariant) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t len = 1 + rng.below(50);
    std::vector<double> x(len), y(len);
    const double c = std::exp(rng.uniform(-10, 10));
    for (std::size_t i = 0; i < len; ++i) {
      x[i] = std::exp(rng.uniform(-8, 1));
      y[i] = c * x[i];
    }
    const auto nx = normalize_lr(x), ny = normalize_lr(y);
    EXPECT_EQ(nx[0], 1.0);
    EXPECT_EQ(ny[0], 1.0);
    for (std::size_t i = 0; i < len; ++i) ASSERT_NEAR(nx[i], ny[i], 1e-12 * std::max(1.0, std::abs(nx[i])));
  }
}

TEST(ResizeNearest, Examples) {
  std::vector<double> ramp(300);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i) * 0.5 - 3;
  EXPECT_EQ(resize_nearest(ramp, 300), ramp);
  EXPECT_EQ(resize_nearest(std::vector<double>{7.0}, 300), std::vector<double>(300, 7.0));
  EXPECT_EQ(resize_nearest(std::vector<double>{0, 1}, 4), (std::vector<double>{0, 0, 1, 1}));
}

TEST(ResizeNearest, Errors) {
  EXPECT_THROW(resize_nearest(std::vector<double>{}, 300), UsageError);
  EXPECT_THROW(resize_nearest(std::vector<double>{1.0}, 0), UsageError);
}

TEST(ResizeNearest, ValuesComeFromInputAndMappingIsMonotone) {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t len = 1 + rng.below(700);
    const std::size_t target = 1 + rng.below(700);
    std::vector<double> x(len);
    for (std::size_t i = 0; i < len; ++i) x[i] = static_cast<double>(i);  // value == source index
    const auto out = resize_nearest(x, target);
    ASSERT_EQ(out.size(), target);
    for (std::size_t i = 0; i < target; ++i) {
      const auto expected = static_cast<double>(((2 * i + 1) * len) / (2 * target));
      ASSERT_EQ(out[i], expected);
      if (i > 0) {
        ASSERT_GE(out[i], out[i - 1]);
      }
    }
    const std::vector<double> flat(len, 3.25);
    for (double v : resize_nearest(flat, target)) ASSERT_EQ(v, 3.25);
  }
}

TEST(FeatureWindow, FullWindowNeedsNoPadding) {
  const int n = 100;
  const auto h = ramp_history(3 * n);
  const FeatureWindow w = build_feature_window(h, n, 3 * n);
  std::vector<double> train, val;
  for (const auto& r : h) {
    train.push_back(r.train_loss);
    val.push_back(r.val_loss);
  }
  const auto zt = zscore(train), zv = zscore(val);
  for (std::size_t i = 0; i < kWindowLength; ++i) {
    EXPECT_EQ(w[Channel::kTrainLoss][i], zt[i]);
    EXPECT_EQ(w[Channel::kValLoss][i], zv[i]);
    EXPECT_EQ(w[Channel::kLr][i], 1.0);
  }
}

TEST(FeatureWindow, FirstInvocationPadsTwoThirds) {
  const int n = 100;
  const auto h = ramp_history(n);
  const FeatureWindow w = build_feature_window(h, n, n);
  std::vector<double> train;
  for (const auto& r : h) train.push_back(r.train_loss);
  const auto zt = zscore(train);
  for (std::size_t i = 0; i < 200; ++i) {
    for (const auto& ch : w.channels) ASSERT_EQ(ch[i], 0.0);
  }
  for (std::size_t i = 200; i < 300; ++i) {
    EXPECT_EQ(w[Channel::kTrainLoss][i], zt[i - 200]);
    EXPECT_EQ(w[Channel::kLr][i], 1.0);
  }
}

TEST(FeatureWindow, ConstantLrIsZerosThenOnes) {
  // n = 2 with two completed epochs: [0 0 0 0 1 1] resampled to 300.
  const auto h = ramp_history(2, 0.01);
  const FeatureWindow w = build_feature_window(h, 2, 2);
  for (std::size_t i = 0; i < 300; ++i) EXPECT_EQ(w[Channel::kLr][i], i < 200 ? 0.0 : 1.0) << i;
}

TEST(FeatureWindow, UsesOnlyEpochsBeforeCurrent) {
  const auto h = ramp_history(40);
  const FeatureWindow a = build_feature_window(h, 5, 20);
  const std::vector<HistoryRecord> prefix(h.begin(), h.begin() + 20);
  EXPECT_EQ(a, build_feature_window(prefix, 5, 20));
}

TEST(FeatureWindow, LrChannelTracksMultipliers) {
  std::vector<HistoryRecord> h;
  double lr = 0.2;
  for (int e = 0; e < 6; ++e) {
    h.push_back({e, 1.0, 1.0, lr});
    if (e % 2 == 1) lr *= 1.618;
  }
  const FeatureWindow w = build_feature_window(h, 2, 6);
  EXPECT_EQ(w[Channel::kLr][0], 1.0);
  EXPECT_NEAR(w[Channel::kLr][299], 1.618 * 1.618, 1e-12);
  EXPECT_EQ(w[Channel::kTrainLoss][150], 0.0);  // constant loss channel
}

TEST(FeatureWindow, Errors) {
  const auto h = ramp_history(10);
  EXPECT_THROW(build_feature_window(h, 0, 5), UsageError);
  EXPECT_THROW(build_feature_window(h, 6, 5), UsageError);
  EXPECT_THROW(build_feature_window(h, 5, 20), UsageError);  // history too short
  auto bad = h;
  bad[3].epoch_index = 2;
  EXPECT_THROW(build_feature_window(bad, 2, 10), DataError);
  auto bad_lr = h;
  bad_lr[8].lr = 0.0;
  EXPECT_THROW(build_feature_window(bad_lr, 2, 10), DataError);
}

TEST(FeatureWindow, RandomHistoriesGiveFinite3x300) {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(10));
    const int epochs = n + static_cast<int>(rng.below(30));
    std::vector<HistoryRecord> h;
    double lr = std::exp(rng.uniform(-9, 1));
    for (int e = 0; e < epochs; ++e) {
      h.push_back({e, rng.uniform(0, 5), rng.uniform(0, 5), lr});
      if (rng.below(4) == 0) lr *= (rng.below(2) ? 1.618 : 0.618);
    }
    const int current = n + static_cast<int>(rng.below(static_cast<std::uint64_t>(epochs - n + 1)));
    const FeatureWindow w = build_feature_window(h, n, current);
    ASSERT_TRUE(w.all_finite());
    ASSERT_EQ(w.channels.size(), 3u);
    ASSERT_EQ(w.channels[0].size(), 300u);
    // The last point is always the most recent epoch's normalized LR.
    const int first = current - std::min(3 * n, current);
    ASSERT_NEAR(w[Channel::kLr][299], h[current - 1].lr / h[first].lr, 1e-12 * w[Channel::kLr][299]);
  }
}

}  // namespace
}  // namespace arc
