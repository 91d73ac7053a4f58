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

#include <cstdint>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/ica/dictionary.hpp"
#include "sparsehear/projection/geometry.hpp"

namespace sparsehear {

// Sorted indices of the 1-entries of a binary vector.
using ActiveSet = std::vector<std::uint32_t>;

// Coefficients of one level on its output grid. Column r * cols + c of
// `coefficients` belongs to lattice cell (rows[r], cols[c]).
struct CoefficientMap {
  int level = 0;
  std::vector<int> rows;
  std::vector<int> cols;
  Matrix coefficients;  // K x (rows * cols)

  auto at(std::size_t r, std::size_t c) const {
    return coefficients.col(static_cast<Eigen::Index>(r * cols.size() + c));
  }
};

// C = D^+ S.
inline Matrix project(const Dictionary& dict, const Matrix& inputs) {
  if (inputs.rows() != dict.input_dim()) {
    throw ShapeError("project: inputs are " + shape_string(inputs.rows(), inputs.cols()) + " but dictionary is " +
                     shape_string(dict.input_dim(), dict.components()));
  }
  return dict.pinv() * inputs;
}

inline Vector project(const Dictionary& dict, const Vector& input) {
  if (input.size() != dict.input_dim()) {
    throw ShapeError("project: input has " + std::to_string(input.size()) + " rows but dictionary is " +
                     shape_string(dict.input_dim(), dict.components()));
  }
  return dict.pinv() * input;
}

}  // namespace sparsehear
