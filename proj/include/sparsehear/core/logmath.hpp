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

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsehear/core/types.hpp"

namespace sparsehear {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

template <class Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  const double m = v.maxCoeff();
  if (m == kLogZero) return kLogZero;
  return m + std::log((v.derived().array() - m).exp().sum());
}

}  // namespace sparsehear
