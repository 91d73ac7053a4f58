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
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "sparsehear/core/binary_io.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/logmath.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/projection/project.hpp"

namespace sparsehear {

inline constexpr double kBernoulliFloor = 1e-4;
inline constexpr double kEmptyComponent = 1e-12;

// Dense 0/1 vector to its sorted active set.
inline ActiveSet to_active_set(const Vector& x) {
  ActiveSet out;
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    if (x(n) == 1.0) {
      out.push_back(static_cast<std::uint32_t>(n));
    } else if (x(n) != 0.0) {
      throw InvalidInput("bernoulli: non-binary value " + std::to_string(x(n)) + " at dimension " + std::to_string(n));
    }
  }
  return out;
}

// Mixture of multivariate Bernoulli distributions over sparse binary
// vectors, each observation given by its active indices.
class BernoulliMixture {
 public:
  using Observation = ActiveSet;
  static constexpr const char* kKind = "bernoulli";
  static constexpr std::uint32_t kTag = 1;

  struct Stats {
    Vector occupancy;  // per component
    Matrix active;     // M x N responsibility-weighted activation counts
    double lowest = std::numeric_limits<double>::infinity();
    Observation lowest_datum;
  };

  BernoulliMixture() = default;

  // Parameters are clamped to [floor, 1 - floor]; priors are renormalized.
  BernoulliMixture(Vector priors, Matrix params) : priors_(std::move(priors)), params_(std::move(params)) {
    if (priors_.size() != params_.rows() || priors_.size() == 0 || params_.cols() == 0) {
      throw ShapeError("bernoulli: priors " + std::to_string(priors_.size()) + " vs params " + shape_string(params_));
    }
    if ((priors_.array() < 0.0).any() || !(priors_.sum() > 0.0)) throw InvalidInput("bernoulli: invalid priors");
    priors_ /= priors_.sum();
    refresh();
  }

  // Uniform priors; every component starts at the column means of `data`
  // perturbed by uniform noise of amplitude 0.05.
  static BernoulliMixture initialize(int components, int dim, const std::vector<const Observation*>& data,
                                     std::mt19937_64& rng) {
    if (components < 1 || dim < 1) throw ConfigError("bernoulli: need M >= 1 and N >= 1");
    Vector mean = Vector::Zero(dim);
    for (const auto* x : data) {
      for (auto n : *x) {
        if (n >= static_cast<std::uint32_t>(dim)) throw ShapeError("bernoulli: active index beyond dimension");
        mean(n) += 1.0;
      }
    }
    if (!data.empty()) mean /= static_cast<double>(data.size());
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    Matrix params(components, dim);
    for (Eigen::Index n = 0; n < dim; ++n)
      for (int i = 0; i < components; ++i) params(i, n) = mean(n) + noise(rng);
    return BernoulliMixture(Vector::Constant(components, 1.0 / components), std::move(params));
  }

  int components() const { return static_cast<int>(priors_.size()); }
  int dim() const { return static_cast<int>(params_.cols()); }
  const Vector& priors() const { return priors_; }
  const Matrix& params() const { return params_; }

  // log p(i) + log p(x | i) for every component.
  Vector component_log_joint(const Observation& x) const {
    Vector out = base_;
    for (auto n : x) {
      if (n >= static_cast<std::uint32_t>(dim())) {
        throw ShapeError("bernoulli: active index " + std::to_string(n) + " >= dimension " + std::to_string(dim()));
      }
      out += gain_.col(n);
    }
    return out;
  }

  double log_pdf(const Observation& x) const { return log_sum_exp(component_log_joint(x)); }
  double log_pdf(const Vector& x) const {
    check_dense(x);
    return log_pdf(to_active_set(x));
  }

  Vector responsibilities(const Observation& x) const {
    const Vector j = component_log_joint(x);
    return (j.array() - log_sum_exp(j)).exp();
  }

  Stats make_stats() const { return {Vector::Zero(components()), Matrix::Zero(components(), dim()), {}, {}}; }

  // Adds `weight` times the responsibilities of x; returns log p(x).
  double accumulate(Stats& s, const Observation& x, double weight = 1.0) const {
    const Vector j = component_log_joint(x);
    const double ll = log_sum_exp(j);
    if (weight > 0.0) {
      const Vector r = weight * (j.array() - ll).exp();
      s.occupancy += r;
      for (auto n : x) s.active.col(n) += r;
      if (ll < s.lowest) {
        s.lowest = ll;
        s.lowest_datum = x;
      }
    }
    return ll;
  }

  // M-step. Returns false (parameters untouched) when the statistics carry no mass.
  bool maximize(const Stats& s) {
    const double total = s.occupancy.sum();
    if (!(total > kEmptyComponent)) return false;
    for (int i = 0; i < components(); ++i) {
      if (s.occupancy(i) < kEmptyComponent) {
        warn("bernoulli: component " + std::to_string(i) + " is empty, re-seeded from lowest-likelihood datum");
        params_.row(i).setZero();
        for (auto n : s.lowest_datum) params_(i, n) = 1.0;
        priors_(i) = 1.0 / components();
      } else {
        params_.row(i) = s.active.row(i) / s.occupancy(i);
        priors_(i) = s.occupancy(i) / total;
      }
    }
    priors_ /= priors_.sum();
    refresh();
    return true;
  }

  void write(std::ostream& out) const {
    io::write_u32(out, static_cast<std::uint32_t>(components()));
    io::write_u32(out, static_cast<std::uint32_t>(dim()));
    for (Eigen::Index i = 0; i < priors_.size(); ++i) io::write_f64(out, priors_(i));
    for (Eigen::Index i = 0; i < params_.rows(); ++i)
      for (Eigen::Index n = 0; n < params_.cols(); ++n) io::write_f64(out, params_(i, n));
  }

  static BernoulliMixture read(std::istream& in) {
    const auto m = io::read_u32(in);
    const auto n = io::read_u32(in);
    if (m == 0 || n == 0 || m > 4096 || n > (1u << 24)) throw FormatError("bernoulli: corrupt mixture header");
    Vector priors(m);
    for (std::uint32_t i = 0; i < m; ++i) priors(i) = io::read_f64(in);
    Matrix params(m, n);
    for (std::uint32_t i = 0; i < m; ++i)
      for (std::uint32_t k = 0; k < n; ++k) params(i, k) = io::read_f64(in);
    return BernoulliMixture(std::move(priors), std::move(params));
  }

 private:
  void check_dense(const Vector& x) const {
    if (x.size() != dim()) {
      throw ShapeError("bernoulli: observation of dimension " + std::to_string(x.size()) + ", mixture has " +
                       std::to_string(dim()));
    }
  }

  void refresh() {
    params_ = params_.cwiseMax(kBernoulliFloor).cwiseMin(1.0 - kBernoulliFloor);
    const Matrix log_q = (1.0 - params_.array()).log().matrix();
    gain_ = (params_.array().log().matrix() - log_q);
    base_ = priors_.array().log().matrix() + log_q.rowwise().sum();
  }

  Vector priors_;
  Matrix params_;
  Matrix gain_;  // log p - log(1 - p)
  Vector base_;  // log prior + sum log(1 - p)
};

}  // namespace sparsehear
