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

#include <cmath>

#include "sparsehear/core/types.hpp"

namespace sparsehear {

// Excess kurtosis of coefficients pooled over all rows after standardizing
// each row (dimension) to zero mean and unit variance. Rows with no variance
// are skipped.
inline double pooled_excess_kurtosis(const Matrix& coefficients) {
  double m4 = 0.0;
  double count = 0.0;
  for (Eigen::Index r = 0; r < coefficients.rows(); ++r) {
    const auto row = coefficients.row(r);
    const double mean = row.mean();
    const double var = (row.array() - mean).square().mean();
    if (!(var > 0.0)) continue;
    m4 += ((row.array() - mean).square() / var).square().sum();
    count += static_cast<double>(row.size());
  }
  return count > 0.0 ? m4 / count - 3.0 : 0.0;
}

}  // namespace sparsehear
