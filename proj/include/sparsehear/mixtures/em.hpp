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

#include <concepts>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/mixtures/bernoulli.hpp"
#include "sparsehear/mixtures/gaussian.hpp"

namespace sparsehear {

// Emission densities usable by the HMM and the EM driver.
template <class E>
concept MixtureEmission = requires(E e, const E ce, typename E::Stats s, const typename E::Observation& x,
                                   std::ostream& out, std::istream& in) {
  { ce.log_pdf(x) } -> std::convertible_to<double>;
  { ce.responsibilities(x) } -> std::convertible_to<Vector>;
  { ce.make_stats() } -> std::same_as<typename E::Stats>;
  { ce.accumulate(s, x, 1.0) } -> std::convertible_to<double>;
  { e.maximize(s) } -> std::same_as<bool>;
  { ce.components() } -> std::convertible_to<int>;
  { ce.dim() } -> std::convertible_to<int>;
  ce.write(out);
  { E::read(in) } -> std::same_as<E>;
  E::kTag;
};

template <MixtureEmission Mix>
struct EmResult {
  Mix mixture;
  std::vector<double> log_likelihoods;  // total data log-likelihood before each M-step, then after the last
};

template <MixtureEmission Mix>
EmResult<Mix> em_fit(Mix mix, const std::vector<typename Mix::Observation>& data, int iterations) {
  if (data.size() < static_cast<std::size_t>(mix.components())) {
    throw InvalidInput("em_fit: " + std::to_string(data.size()) + " data points for " +
                       std::to_string(mix.components()) + " components");
  }
  EmResult<Mix> out{std::move(mix), {}};
  for (int it = 0; it <= iterations; ++it) {
    auto stats = out.mixture.make_stats();
    double ll = 0.0;
    for (const auto& x : data) ll += out.mixture.accumulate(stats, x, 1.0);
    out.log_likelihoods.push_back(ll);
    if (it == iterations) break;
    out.mixture.maximize(stats);
  }
  return out;
}

}  // namespace sparsehear
