// Copyright 2026 The sparsehear Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/types.hpp"

namespace sparsehear {

// Centering followed by a PCA-whitening map: z = transform * (x - mean).
struct Whitening {
  Vector mean;
  Matrix transform;  // out_dim x in_dim
  Vector eigenvalues;
  int dropped = 0;   // dimensions removed for falling under the eigenvalue floor

  Eigen::Index in_dim() const { return transform.cols(); }
  Eigen::Index out_dim() const { return transform.rows(); }
  Matrix apply(const Matrix& x) const { return transform * (x.colwise() - mean); }
};

struct WhiteningResult {
  Matrix whitened;  // out_dim x n
  Whitening whitening;
};

inline constexpr double kEigenFloor = 1e-10;

// out_dim <= 0 keeps every dimension above the eigenvalue floor.
inline WhiteningResult whiten(Matrix data, int out_dim = 0) {
  const auto dim = data.rows();
  const auto n = data.cols();
  if (dim == 0 || n == 0) throw InvalidInput("whiten: empty batch");
  if (!data.allFinite()) throw InvalidInput("whiten: batch has non-finite entries");
  if (out_dim > dim) {
    throw ConfigError("whiten: out_dim " + std::to_string(out_dim) + " exceeds input dim " + std::to_string(dim));
  }
  const Eigen::Index target = out_dim > 0 ? out_dim : dim;
  if (n <= target) {
    throw InvalidInput("whiten: need more examples (" + std::to_string(n) + ") than output dimensions (" +
                       std::to_string(target) + ")");
  }
  WhiteningResult result;
  auto& w = result.whitening;
  w.mean = data.rowwise().mean();
  data.colwise() -= w.mean;
  const Matrix& centered = data;
  Matrix cov = Matrix::Zero(dim, dim);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / static_cast<double>(n));
  cov = cov.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("whiten: eigendecomposition failed");

  // Eigen sorts ascending; walk from the top.
  const Vector& values = eig.eigenvalues();
  const double top = values(dim - 1);
  if (!(top > 0.0)) throw NumericError("whiten: batch has zero variance");
  Eigen::Index usable = 0;
  for (Eigen::Index i = dim - 1; i >= 0 && values(i) >= kEigenFloor * top; --i) ++usable;
  const Eigen::Index keep = std::min(usable, target);
  w.dropped = static_cast<int>(std::min<Eigen::Index>(target, dim) - keep);
  if (w.dropped > 0) {
    warn("whiten: dropped " + std::to_string(w.dropped) + " dimension(s) below eigenvalue floor");
  }
  w.transform.resize(keep, dim);
  w.eigenvalues.resize(keep);
  for (Eigen::Index k = 0; k < keep; ++k) {
    const Eigen::Index src = dim - 1 - k;
    w.eigenvalues(k) = values(src);
    w.transform.row(k) = eig.eigenvectors().col(src).transpose() / std::sqrt(values(src));
  }
  result.whitened = w.transform * centered;
  return result;
}

}  // namespace sparsehear
