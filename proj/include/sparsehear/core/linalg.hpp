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
#include <Eigen/SVD>

#include <cmath>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/types.hpp"

namespace sparsehear {

// Moore-Penrose pseudo-inverse by SVD; singular values below
// rel_tol * sigma_max are treated as zero.
inline Matrix pseudo_inverse(const Matrix& a, double rel_tol = 1e-10) {
  if (a.size() == 0) return Matrix(a.cols(), a.rows());
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() > 0 ? s(0) : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// (A A^T)^{-1/2} A for a full-row-rank A: the closest matrix with orthonormal rows.
inline Matrix symmetric_orthonormalize(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a * a.transpose());
  if (eig.info() != Eigen::Success) throw NumericError("symmetric decorrelation: eigensolver failed");
  Vector d = eig.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d(i) > 0.0)) throw NumericError("symmetric decorrelation: rank-deficient rows");
    d(i) = 1.0 / std::sqrt(d(i));
  }
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose() * a;
}

}  // namespace sparsehear
