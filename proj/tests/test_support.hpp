// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "arc/layers.hpp"
#include "arc/rng.hpp"

namespace arc::testing {

inline nn::Matrix random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  nn::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-scale, scale);
  }
  return m;
}

// |a - b| / max(|a|, |b|, floor); the floor keeps near-zero gradients from
// turning rounding noise into large ratios.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Compares grad(i, j) with a central difference of `loss` over every entry of
// `param`. Returns the largest relative error.
template <typename LossFn>
double max_fd_error(nn::Matrix& param, const nn::Matrix& grad, LossFn&& loss, double eps = 1e-5) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < param.rows(); ++i) {
    for (Eigen::Index j = 0; j < param.cols(); ++j) {
      const double saved = param(i, j);
      param(i, j) = saved + eps;
      const double up = loss();
      param(i, j) = saved - eps;
      const double down = loss();
      param(i, j) = saved;
      worst = std::max(worst, relative_error((up - down) / (2 * eps), grad(i, j)));
    }
  }
  return worst;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("arc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace arc::testing
