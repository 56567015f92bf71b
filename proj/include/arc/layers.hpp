// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Hand-derived forward/backward passes for the controller's layer types.
//
// Sequence activations are stored time-major: a batch of B sequences of length
// T with C channels is a (T*B) x C matrix whose row t*B + b holds sequence b at
// step t. Every backward() accumulates into the parameter gradients it is given
// and returns the gradient with respect to its input.

#include <string_view>

#include <Eigen/Core>

namespace arc::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Conv1d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  Matrix weight;  // (kernel * in_channels) x out_channels, row k * in_channels + c
  Matrix bias;    // 1 x out_channels

  Conv1d() = default;
  Conv1d(int in, int out, int kernel_size, int stride_len);
  int output_length(int input_length) const;

  template <typename F>
  void for_each_param(F&& f) {
    f("weight", weight);
    f("bias", bias);
  }
  template <typename F>
  void for_each_param(F&& f) const {
    f("weight", weight);
    f("bias", bias);
  }
};

struct Conv1dCache {
  Matrix cols;  // im2col buffer, (out_len * B) x (kernel * in_channels)
  int batch = 0;
  int in_length = 0;
};

Matrix forward(const Conv1d& layer, const Matrix& in, int batch, Conv1dCache* cache);
Matrix backward(const Conv1d& layer, const Conv1dCache& cache, const Matrix& d_out, Conv1d& grad);

// LSTM with gate column blocks ordered input, forget, candidate, output.
// Initial hidden and cell states are zero.
struct Lstm {
  int input_size = 0;
  int hidden_size = 0;
  Matrix weight_x;  // input_size x 4H
  Matrix weight_h;  // H x 4H
  Matrix bias;      // 1 x 4H

  Lstm() = default;
  Lstm(int input, int hidden);

  template <typename F>
  void for_each_param(F&& f) {
    f("weight_x", weight_x);
    f("weight_h", weight_h);
    f("bias", bias);
  }
  template <typename F>
  void for_each_param(F&& f) const {
    f("weight_x", weight_x);
    f("weight_h", weight_h);
    f("bias", bias);
  }
};

struct LstmCache {
  Matrix input;
  Matrix gates;  // post-nonlinearity gate values, (T*B) x 4H
  Matrix cells;
  Matrix cell_tanh;
  Matrix hidden;
  int batch = 0;
};

Matrix forward(const Lstm& layer, const Matrix& in, int batch, LstmCache* cache);
Matrix backward(const Lstm& layer, const LstmCache& cache, const Matrix& d_hidden, Lstm& grad);

struct Dense {
  int in_features = 0;
  int out_features = 0;
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out

  Dense() = default;
  Dense(int in, int out);

  template <typename F>
  void for_each_param(F&& f) {
    f("weight", weight);
    f("bias", bias);
  }
  template <typename F>
  void for_each_param(F&& f) const {
    f("weight", weight);
    f("bias", bias);
  }
};

struct DenseCache {
  Matrix input;
};

Matrix forward(const Dense& layer, const Matrix& in, DenseCache* cache);
Matrix backward(const Dense& layer, const DenseCache& cache, const Matrix& d_out, Dense& grad);

void relu_inplace(Matrix& x);
// Masks `d` where the post-activation output was not positive.
void relu_backward_inplace(const Matrix& activated, Matrix& d);

// Throws NumericError naming `layer` if m holds a non-finite value.
void check_finite(const Matrix& m, std::string_view layer);

}  // namespace arc::nn
