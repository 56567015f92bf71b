// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/layers.hpp"

#include <string>

#include "arc/errors.hpp"

namespace arc::nn {

Conv1d::Conv1d(int in, int out, int kernel_size, int stride_len)
    : in_channels(in),
      out_channels(out),
      kernel(kernel_size),
      stride(stride_len),
      weight(Matrix::Zero(kernel_size * in, out)),
      bias(Matrix::Zero(1, out)) {}

int Conv1d::output_length(int input_length) const {
  if (input_length < kernel) return 0;
  return (input_length - kernel) / stride + 1;
}

Matrix forward(const Conv1d& layer, const Matrix& in, int batch, Conv1dCache* cache) {
  if (batch <= 0 || in.rows() % batch != 0 || in.cols() != layer.in_channels) {
    throw UsageError("conv1d: input shape mismatch");
  }
  const int in_len = static_cast<int>(in.rows()) / batch;
  const int out_len = layer.output_length(in_len);
  if (out_len <= 0) throw UsageError("conv1d: input shorter than kernel");
  const int c = layer.in_channels;

  Matrix cols(static_cast<Eigen::Index>(out_len) * batch, layer.kernel * c);
  for (int t = 0; t < out_len; ++t) {
    for (int k = 0; k < layer.kernel; ++k) {
      cols.block(t * batch, k * c, batch, c) = in.middleRows((t * layer.stride + k) * batch, batch);
    }
  }
  Matrix out = cols * layer.weight;
  out.rowwise() += layer.bias.row(0);
  if (cache) {
    cache->cols = std::move(cols);
    cache->batch = batch;
    cache->in_length = in_len;
  }
  return out;
}

Matrix backward(const Conv1d& layer, const Conv1dCache& cache, const Matrix& d_out, Conv1d& grad) {
  const int batch = cache.batch;
  const int c = layer.in_channels;
  const int out_len = static_cast<int>(d_out.rows()) / batch;

  grad.weight.noalias() += cache.cols.transpose() * d_out;
  grad.bias += d_out.colwise().sum();

  const Matrix d_cols = d_out * layer.weight.transpose();
  Matrix d_in = Matrix::Zero(static_cast<Eigen::Index>(cache.in_length) * batch, c);
  for (int t = 0; t < out_len; ++t) {
    for (int k = 0; k < layer.kernel; ++k) {
      d_in.middleRows((t * layer.stride + k) * batch, batch) += d_cols.block(t * batch, k * c, batch, c);
    }
  }
  return d_in;
}

Lstm::Lstm(int input, int hidden)
    : input_size(input),
      hidden_size(hidden),
      weight_x(Matrix::Zero(input, 4 * hidden)),
      weight_h(Matrix::Zero(hidden, 4 * hidden)),
      bias(Matrix::Zero(1, 4 * hidden)) {}

Matrix forward(const Lstm& layer, const Matrix& in, int batch, LstmCache* cache) {
  if (batch <= 0 || in.rows() % batch != 0 || in.cols() != layer.input_size) {
    throw UsageError("lstm: input shape mismatch");
  }
  const int steps = static_cast<int>(in.rows()) / batch;
  const int h = layer.hidden_size;

  Matrix z = in * layer.weight_x;
  z.rowwise() += layer.bias.row(0);
  Matrix hidden(in.rows(), h);
  Matrix cells(in.rows(), h);
  Matrix cell_tanh(in.rows(), h);

  for (int t = 0; t < steps; ++t) {
    auto zt = z.middleRows(t * batch, batch);
    if (t > 0) zt.noalias() += hidden.middleRows((t - 1) * batch, batch) * layer.weight_h;

    auto gi = zt.middleCols(0, h).array();
    auto gf = zt.middleCols(h, h).array();
    auto gg = zt.middleCols(2 * h, h).array();
    auto go = zt.middleCols(3 * h, h).array();
    gi = gi.logistic();
    gf = gf.logistic();
    gg = gg.tanh();
    go = go.logistic();

    auto ct = cells.middleRows(t * batch, batch).array();
    if (t > 0) {
      ct = gf * cells.middleRows((t - 1) * batch, batch).array() + gi * gg;
    } else {
      ct = gi * gg;
    }
    auto tt = cell_tanh.middleRows(t * batch, batch).array();
    tt = ct.tanh();
    hidden.middleRows(t * batch, batch).array() = go * tt;
  }

  if (cache) {
    cache->input = in;
    cache->gates = std::move(z);
    cache->cells = std::move(cells);
    cache->cell_tanh = std::move(cell_tanh);
    cache->hidden = hidden;
    cache->batch = batch;
  }
  return hidden;
}

Matrix backward(const Lstm& layer, const LstmCache& cache, const Matrix& d_hidden, Lstm& grad) {
  const int batch = cache.batch;
  const int h = layer.hidden_size;
  const int steps = static_cast<int>(cache.hidden.rows()) / batch;

  Matrix dz(cache.gates.rows(), 4 * h);
  Matrix dh_next = Matrix::Zero(batch, h);
  Matrix dc_next = Matrix::Zero(batch, h);

  for (int t = steps - 1; t >= 0; --t) {
    const auto gates = cache.gates.middleRows(t * batch, batch);
    const auto i = gates.middleCols(0, h).array();
    const auto f = gates.middleCols(h, h).array();
    const auto g = gates.middleCols(2 * h, h).array();
    const auto o = gates.middleCols(3 * h, h).array();
    const auto tanh_c = cache.cell_tanh.middleRows(t * batch, batch).array();

    const Matrix dh = d_hidden.middleRows(t * batch, batch) + dh_next;
    const auto dha = dh.array();
    Matrix dc = (dha * o * (1.0 - tanh_c.square())).matrix() + dc_next;
    const auto dca = dc.array();

    auto dzt = dz.middleRows(t * batch, batch);
    dzt.middleCols(0, h).array() = dca * g * i * (1.0 - i);
    if (t > 0) {
      dzt.middleCols(h, h).array() =
          dca * cache.cells.middleRows((t - 1) * batch, batch).array() * f * (1.0 - f);
    } else {
      dzt.middleCols(h, h).setZero();
    }
    dzt.middleCols(2 * h, h).array() = dca * i * (1.0 - g.square());
    dzt.middleCols(3 * h, h).array() = dha * tanh_c * o * (1.0 - o);

    dc_next.array() = dca * f;
    if (t > 0) dh_next.noalias() = dzt * layer.weight_h.transpose();
  }

  if (steps > 1) {
    const Eigen::Index prev_rows = static_cast<Eigen::Index>(steps - 1) * batch;
    grad.weight_h.noalias() += cache.hidden.topRows(prev_rows).transpose() * dz.bottomRows(prev_rows);
  }
  grad.weight_x.noalias() += cache.input.transpose() * dz;
  grad.bias += dz.colwise().sum();
  return dz * layer.weight_x.transpose();
}

Dense::Dense(int in, int out)
    : in_features(in),
      out_features(out),
      weight(Matrix::Zero(in, out)),
      bias(Matrix::Zero(1, out)) {}

Matrix forward(const Dense& layer, const Matrix& in, DenseCache* cache) {
  if (in.cols() != layer.in_features) throw UsageError("dense: input shape mismatch");
  Matrix out = in * layer.weight;
  out.rowwise() += layer.bias.row(0);
  if (cache) cache->input = in;
  return out;
}

Matrix backward(const Dense& layer, const DenseCache& cache, const Matrix& d_out, Dense& grad) {
  grad.weight.noalias() += cache.input.transpose() * d_out;
  grad.bias += d_out.colwise().sum();
  return d_out * layer.weight.transpose();
}

void relu_inplace(Matrix& x) { x = x.cwiseMax(0.0); }

void relu_backward_inplace(const Matrix& activated, Matrix& d) {
  d = (activated.array() > 0.0).select(d, 0.0);
}

void check_finite(const Matrix& m, std::string_view layer) {
  if (!m.allFinite()) throw NumericError("non-finite value in layer '" + std::string(layer) + "'");
}

}  // namespace arc::nn
