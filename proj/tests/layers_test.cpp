// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/layers.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "arc/errors.hpp"
#include "arc/rng.hpp"
#include "test_support.hpp"

namespace arc::nn {
namespace {

using arc::testing::max_fd_error;
using arc::testing::random_matrix;

constexpr double kTol = 1e-4;
constexpr int kTrials = 20;

double weighted_sum(const Matrix& out, const Matrix& r) { return out.cwiseProduct(r).sum(); }

void randomize(Rng& rng, Conv1d& c) {
  c.weight = random_matrix(rng, static_cast<int>(c.weight.rows()), static_cast<int>(c.weight.cols()), 0.5);
  c.bias = random_matrix(rng, 1, c.out_channels, 0.5);
}

TEST(Conv1d, OutputLength) {
  Conv1d c(3, 16, 5, 2);
  EXPECT_EQ(c.output_length(300), 148);
  Conv1d d(16, 32, 5, 2);
  EXPECT_EQ(d.output_length(148), 72);
}

TEST(Conv1d, MatchesDirectSum) {
  Rng rng(21);
  Conv1d c(2, 3, 3, 2);
  randomize(rng, c);
  const int len = 9, batch = 2;
  const Matrix in = random_matrix(rng, len * batch, 2);
  const Matrix out = forward(c, in, batch, nullptr);
  const int out_len = c.output_length(len);
  ASSERT_EQ(out.rows(), out_len * batch);
  for (int t = 0; t < out_len; ++t) {
    for (int b = 0; b < batch; ++b) {
      for (int o = 0; o < 3; ++o) {
        double s = c.bias(0, o);
        for (int k = 0; k < 3; ++k) {
          for (int ch = 0; ch < 2; ++ch) s += c.weight(k * 2 + ch, o) * in((t * 2 + k) * batch + b, ch);
        }
        EXPECT_NEAR(out(t * batch + b, o), s, 1e-12);
      }
    }
  }
}

TEST(Conv1d, GradientCheck) {
  Rng rng(22);
  for (int trial = 0; trial < kTrials; ++trial) {
    const int in_ch = 1 + static_cast<int>(rng.below(3));
    const int out_ch = 1 + static_cast<int>(rng.below(4));
    const int kernel = 1 + static_cast<int>(rng.below(4));
    const int stride = 1 + static_cast<int>(rng.below(3));
    const int len = kernel + static_cast<int>(rng.below(8));
    const int batch = 1 + static_cast<int>(rng.below(3));
    Conv1d c(in_ch, out_ch, kernel, stride);
    randomize(rng, c);
    Matrix in = random_matrix(rng, len * batch, in_ch);
    const Matrix r = random_matrix(rng, c.output_length(len) * batch, out_ch);

    Conv1dCache cache;
    forward(c, in, batch, &cache);
    Conv1d grad(in_ch, out_ch, kernel, stride);
    const Matrix d_in = backward(c, cache, r, grad);
    auto loss = [&] { return weighted_sum(forward(c, in, batch, nullptr), r); };
    EXPECT_LT(max_fd_error(c.weight, grad.weight, loss), kTol);
    EXPECT_LT(max_fd_error(c.bias, grad.bias, loss), kTol);
    EXPECT_LT(max_fd_error(in, d_in, loss), kTol);
  }
}

TEST(Lstm, GradientCheck) {
  Rng rng(23);
  for (int trial = 0; trial < kTrials; ++trial) {
    const int input = 1 + static_cast<int>(rng.below(4));
    const int hidden = 1 + static_cast<int>(rng.below(4));
    const int steps = 1 + static_cast<int>(rng.below(5));
    const int batch = 1 + static_cast<int>(rng.below(3));
    Lstm l(input, hidden);
    l.weight_x = random_matrix(rng, input, 4 * hidden, 0.7);
    l.weight_h = random_matrix(rng, hidden, 4 * hidden, 0.7);
    l.bias = random_matrix(rng, 1, 4 * hidden, 0.5);
    Matrix in = random_matrix(rng, steps * batch, input);
    const Matrix r = random_matrix(rng, steps * batch, hidden);

    LstmCache cache;
    forward(l, in, batch, &cache);
    Lstm grad(input, hidden);
    const Matrix d_in = backward(l, cache, r, grad);
    auto loss = [&] { return weighted_sum(forward(l, in, batch, nullptr), r); };
    EXPECT_LT(max_fd_error(l.weight_x, grad.weight_x, loss), kTol);
    EXPECT_LT(max_fd_error(l.weight_h, grad.weight_h, loss), kTol);
    EXPECT_LT(max_fd_error(l.bias, grad.bias, loss), kTol);
    EXPECT_LT(max_fd_error(in, d_in, loss), kTol);
  }
}

TEST(Lstm, ZeroWeightsGiveKnownState) {
  // With all-zero parameters every gate is 0.5 and the candidate is 0, so the
  // cell and hidden state stay at zero.
  Lstm l(2, 3);
  Rng rng(24);
  const Matrix in = random_matrix(rng, 4 * 2, 2);
  const Matrix h = forward(l, in, 2, nullptr);
  EXPECT_EQ(h.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dense, GradientCheck) {
  Rng rng(25);
  for (int trial = 0; trial < kTrials; ++trial) {
    const int in_f = 1 + static_cast<int>(rng.below(6));
    const int out_f = 1 + static_cast<int>(rng.below(6));
    const int batch = 1 + static_cast<int>(rng.below(4));
    Dense d(in_f, out_f);
    d.weight = random_matrix(rng, in_f, out_f);
    d.bias = random_matrix(rng, 1, out_f);
    Matrix in = random_matrix(rng, batch, in_f);
    const Matrix r = random_matrix(rng, batch, out_f);
    DenseCache cache;
    forward(d, in, &cache);
    Dense grad(in_f, out_f);
    const Matrix d_in = backward(d, cache, r, grad);
    auto loss = [&] { return weighted_sum(forward(d, in, nullptr), r); };
    EXPECT_LT(max_fd_error(d.weight, grad.weight, loss), kTol);
    EXPECT_LT(max_fd_error(d.bias, grad.bias, loss), kTol);
    EXPECT_LT(max_fd_error(in, d_in, loss), kTol);
  }
}

TEST(Dense, BackwardAccumulates) {
  Rng rng(26);
  Dense d(3, 2);
  d.weight = random_matrix(rng, 3, 2);
  const Matrix in = random_matrix(rng, 4, 3);
  const Matrix r = random_matrix(rng, 4, 2);
  DenseCache cache;
  forward(d, in, &cache);
  Dense once(3, 2), twice(3, 2);
  backward(d, cache, r, once);
  backward(d, cache, r, twice);
  backward(d, cache, r, twice);
  EXPECT_TRUE(twice.weight.isApprox(2 * once.weight, 1e-14));
}

TEST(Relu, ForwardAndBackward) {
  Matrix x(1, 4);
  x << -1, 0, 2, -3;
  relu_inplace(x);
  EXPECT_EQ(x(0, 0), 0.0);
  EXPECT_EQ(x(0, 2), 2.0);
  Matrix d = Matrix::Ones(1, 4);
  relu_backward_inplace(x, d);
  EXPECT_EQ(d(0, 0), 0.0);
  EXPECT_EQ(d(0, 1), 0.0);
  EXPECT_EQ(d(0, 2), 1.0);
}

TEST(CheckFinite, NamesTheLayer) {
  Matrix m = Matrix::Zero(2, 2);
  EXPECT_NO_THROW(check_finite(m, "conv1"));
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    check_finite(m, "rnn2");
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("rnn2"), std::string::npos);
  }
}

}  // namespace
}  // namespace arc::nn
