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

// Symmetric fixed-point FastICA on whitened data.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/linalg.hpp"
#include "sparsehear/core/types.hpp"

namespace sparsehear {

enum class Contrast { kLogCosh, kExp, kKurtosis };

inline std::string to_string(Contrast c) {
  switch (c) {
    case Contrast::kLogCosh: return "logcosh";
    case Contrast::kExp: return "exp";
    case Contrast::kKurtosis: return "kurtosis";
  }
  return "?";
}

inline Contrast contrast_from_string(const std::string& s) {
  if (s == "logcosh") return Contrast::kLogCosh;
  if (s == "exp") return Contrast::kExp;
  if (s == "kurtosis") return Contrast::kKurtosis;
  throw ConfigError("unknown ICA contrast \"" + s + "\"");
}

struct FastIcaOptions {
  int components = 0;  // K
  Contrast contrast = Contrast::kLogCosh;
  int max_iter = 400;
  double tol = 1e-5;
  std::uint64_t seed = 0;
};

struct FastIcaResult {
  Matrix unmixing;     // K x whitened dim, orthonormal rows
  int iterations = 0;
  bool converged = false;
  double final_change = 0.0;
  Vector negentropy;   // per component, (E G(y) - E G(nu))^2
  // Every component is indistinguishable from a Gaussian; ICA has nothing to find.
  bool near_gaussian = false;
};

namespace detail {

inline double contrast_value(Contrast c, double u) {
  switch (c) {
    case Contrast::kLogCosh: {
      const double a = std::abs(u);
      return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
    }
    case Contrast::kExp: return -std::exp(-0.5 * u * u);
    case Contrast::kKurtosis: return 0.25 * u * u * u * u;
  }
  return 0.0;
}

// E[G(nu)] for a standard normal nu, by Simpson quadrature.
inline double gaussian_contrast_mean(Contrast c) {
  const int n = 4000;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * contrast_value(c, x) * std::exp(-0.5 * x * x);
  }
  return acc * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

// Fills g(Y) in place and returns the row means of g'(Y).
inline Vector apply_nonlinearity(Contrast c, Matrix& y) {
  Vector mean_deriv = Vector::Zero(y.rows());
  const double n = static_cast<double>(y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double u = y(i, j);
      double g = 0.0, gp = 0.0;
      switch (c) {
        case Contrast::kLogCosh: {
          g = std::tanh(u);
          gp = 1.0 - g * g;
          break;
        }
        case Contrast::kExp: {
          const double e = std::exp(-0.5 * u * u);
          g = u * e;
          gp = (1.0 - u * u) * e;
          break;
        }
        case Contrast::kKurtosis: {
          g = u * u * u;
          gp = 3.0 * u * u;
          break;
        }
      }
      y(i, j) = g;
      mean_deriv(i) += gp;
    }
  }
  return mean_deriv / n;
}

}  // namespace detail

inline Vector negentropy(const Matrix& sources, Contrast c) {
  const double ref = detail::gaussian_contrast_mean(c);
  Vector out(sources.rows());
  for (Eigen::Index i = 0; i < sources.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < sources.cols(); ++j) acc += detail::contrast_value(c, sources(i, j));
    const double d = acc / static_cast<double>(sources.cols()) - ref;
    out(i) = d * d;
  }
  return out;
}

// Threshold on per-component negentropy under which data is reported as Gaussian.
inline constexpr double kGaussianNegentropy = 1e-4;

inline FastIcaResult fast_ica(const Matrix& whitened, const FastIcaOptions& opt) {
  const auto dim = whitened.rows();
  const auto n = whitened.cols();
  const Eigen::Index k = opt.components > 0 ? opt.components : dim;
  if (k > dim) {
    throw ConfigError("fast_ica: " + std::to_string(k) + " components requested from " + std::to_string(dim) +
                      "-dimensional whitened data");
  }
  if (n < 2) throw InvalidInput("fast_ica: need at least two examples");
  if (opt.max_iter < 1 || !(opt.tol > 0.0)) throw ConfigError("fast_ica: max_iter >= 1 and tol > 0 required");

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(k, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) w(i, j) = normal(rng);
  }
  w = symmetric_orthonormalize(w);

  FastIcaResult result;
  Matrix best = w;
  double best_change = std::numeric_limits<double>::infinity();
  double last_change = best_change;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 1; it <= opt.max_iter; ++it) {
    Matrix y = w * whitened;
    const Vector mean_deriv = detail::apply_nonlinearity(opt.contrast, y);
    Matrix next = (y * whitened.transpose()) * inv_n - mean_deriv.asDiagonal() * w;
    next = symmetric_orthonormalize(next);
    const double change = (1.0 - (next * w.transpose()).diagonal().cwiseAbs().array()).abs().maxCoeff();
    w = std::move(next);
    last_change = change;
    result.iterations = it;
    if (change < best_change) {
      best_change = change;
      best = w;
    }
    if (change < opt.tol) {
      result.converged = true;
      break;
    }
  }
  result.unmixing = result.converged ? w : best;
  result.final_change = result.converged ? last_change : best_change;
  if (!result.converged) {
    warn("fast_ica: no convergence after " + std::to_string(opt.max_iter) + " iterations (best change " +
         std::to_string(best_change) + ")");
  }
  result.negentropy = negentropy(result.unmixing * whitened, opt.contrast);
  result.near_gaussian = result.negentropy.maxCoeff() < kGaussianNegentropy;
  return result;
}

}  // namespace sparsehear
