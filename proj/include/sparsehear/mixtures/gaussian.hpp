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
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "sparsehear/core/binary_io.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/logmath.hpp"
#include "sparsehear/core/types.hpp"

namespace sparsehear {

inline constexpr double kVarianceFloor = 1e-6;

// Mixture of diagonal-covariance Gaussians.
class GaussianMixture {
 public:
  using Observation = Vector;
  static constexpr const char* kKind = "gaussian";
  static constexpr std::uint32_t kTag = 2;

  struct Stats {
    Vector occupancy;
    Matrix sum;     // M x N
    Matrix sum_sq;  // M x N
    double lowest = std::numeric_limits<double>::infinity();
    Observation lowest_datum;
  };

  GaussianMixture() = default;

  GaussianMixture(Vector priors, Matrix means, Matrix variances)
      : priors_(std::move(priors)), means_(std::move(means)), variances_(std::move(variances)) {
    if (priors_.size() == 0 || priors_.size() != means_.rows() || means_.rows() != variances_.rows() ||
        means_.cols() != variances_.cols() || means_.cols() == 0) {
      throw ShapeError("gaussian: priors " + std::to_string(priors_.size()) + ", means " + shape_string(means_) +
                       ", variances " + shape_string(variances_));
    }
    if ((priors_.array() < 0.0).any() || !(priors_.sum() > 0.0)) throw InvalidInput("gaussian: invalid priors");
    priors_ /= priors_.sum();
    refresh();
  }

  // Uniform priors, means at distinct random data points, variances equal
  // to the global per-dimension variance.
  static GaussianMixture initialize(int components, int dim, const std::vector<const Observation*>& data,
                                    std::mt19937_64& rng) {
    if (components < 1 || dim < 1) throw ConfigError("gaussian: need M >= 1 and N >= 1");
    if (data.empty()) throw InvalidInput("gaussian: cannot initialize from no data");
    Vector mean = Vector::Zero(dim), sq = Vector::Zero(dim);
    for (const auto* x : data) {
      if (x->size() != dim) throw ShapeError("gaussian: observation dimension mismatch");
      mean += *x;
      sq += x->cwiseAbs2();
    }
    mean /= static_cast<double>(data.size());
    const Vector var = (sq / static_cast<double>(data.size()) - mean.cwiseAbs2()).cwiseMax(kVarianceFloor);
    std::vector<std::size_t> idx(data.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::shuffle(idx.begin(), idx.end(), rng);
    Matrix means(components, dim), vars(components, dim);
    for (int i = 0; i < components; ++i) {
      means.row(i) = data[idx[static_cast<std::size_t>(i) % idx.size()]]->transpose();
      vars.row(i) = var.transpose();
    }
    return GaussianMixture(Vector::Constant(components, 1.0 / components), std::move(means), std::move(vars));
  }

  int components() const { return static_cast<int>(priors_.size()); }
  int dim() const { return static_cast<int>(means_.cols()); }
  const Vector& priors() const { return priors_; }
  const Matrix& means() const { return means_; }
  const Matrix& variances() const { return variances_; }

  Vector component_log_joint(const Observation& x) const {
    if (x.size() != dim()) {
      throw ShapeError("gaussian: observation of dimension " + std::to_string(x.size()) + ", mixture has " +
                       std::to_string(dim()));
    }
    Vector out(components());
    for (int i = 0; i < components(); ++i) {
      out(i) = base_(i) - 0.5 * ((x.transpose() - means_.row(i)).array().square() * inv_var_.row(i).array()).sum();
    }
    return out;
  }

  double log_pdf(const Observation& x) const { return log_sum_exp(component_log_joint(x)); }

  Vector responsibilities(const Observation& x) const {
    const Vector j = component_log_joint(x);
    return (j.array() - log_sum_exp(j)).exp();
  }

  Stats make_stats() const {
    return {Vector::Zero(components()), Matrix::Zero(components(), dim()), Matrix::Zero(components(), dim()), {}, {}};
  }

  double accumulate(Stats& s, const Observation& x, double weight = 1.0) const {
    const Vector j = component_log_joint(x);
    const double ll = log_sum_exp(j);
    if (weight > 0.0) {
      const Vector r = weight * (j.array() - ll).exp();
      s.occupancy += r;
      s.sum += r * x.transpose();
      s.sum_sq += r * x.cwiseAbs2().transpose();
      if (ll < s.lowest) {
        s.lowest = ll;
        s.lowest_datum = x;
      }
    }
    return ll;
  }

  bool maximize(const Stats& s) {
    const double total = s.occupancy.sum();
    if (!(total > 1e-12)) return false;
    for (int i = 0; i < components(); ++i) {
      if (s.occupancy(i) < 1e-12) {
        warn("gaussian: component " + std::to_string(i) + " is empty, re-seeded from lowest-likelihood datum");
        means_.row(i) = s.lowest_datum.transpose();
        priors_(i) = 1.0 / components();
      } else {
        const double w = s.occupancy(i);
        means_.row(i) = s.sum.row(i) / w;
        variances_.row(i) = s.sum_sq.row(i) / w - means_.row(i).cwiseAbs2();
        priors_(i) = w / total;
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
    for (const Matrix* m : {&means_, &variances_})
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index n = 0; n < m->cols(); ++n) io::write_f64(out, (*m)(i, n));
  }

  static GaussianMixture read(std::istream& in) {
    const auto m = io::read_u32(in);
    const auto n = io::read_u32(in);
    if (m == 0 || n == 0 || m > 4096 || n > (1u << 20)) throw FormatError("gaussian: corrupt mixture header");
    Vector priors(m);
    for (std::uint32_t i = 0; i < m; ++i) priors(i) = io::read_f64(in);
    Matrix means(m, n), vars(m, n);
    for (Matrix* mat : {&means, &vars})
      for (std::uint32_t i = 0; i < m; ++i)
        for (std::uint32_t k = 0; k < n; ++k) (*mat)(i, k) = io::read_f64(in);
    return GaussianMixture(std::move(priors), std::move(means), std::move(vars));
  }

 private:
  void refresh() {
    if (!variances_.allFinite() || !means_.allFinite()) throw NumericError("gaussian: non-finite parameters");
    variances_ = variances_.cwiseMax(kVarianceFloor);
    inv_var_ = variances_.cwiseInverse();
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    base_.resize(components());
    for (int i = 0; i < components(); ++i) {
      base_(i) = std::log(priors_(i)) - 0.5 * (dim() * log_2pi + variances_.row(i).array().log().sum());
    }
  }

  Vector priors_;
  Matrix means_;
  Matrix variances_;
  Matrix inv_var_;
  Vector base_;
};

}  // namespace sparsehear
