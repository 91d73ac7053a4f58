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
#include <string>
#include <utility>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/logmath.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/mixtures/em.hpp"

namespace sparsehear {

// Whole-word left-right HMM. State q either stays (a_qq) or advances to
// q + 1; the chain starts in state 0 and the last state is absorbing.
template <MixtureEmission Emission>
class WordHmm {
 public:
  using Observation = typename Emission::Observation;
  using Sequence = std::vector<Observation>;

  WordHmm() = default;

  WordHmm(std::string label, Vector self_loops, std::vector<Emission> emissions)
      : label_(std::move(label)), emissions_(std::move(emissions)) {
    const auto n = static_cast<Eigen::Index>(emissions_.size());
    if (n == 0) throw ConfigError("hmm: at least one state required");
    if (self_loops.size() != n) throw ShapeError("hmm: one self-loop probability per state required");
    for (const auto& e : emissions_) {
      if (e.dim() != emissions_.front().dim()) throw ShapeError("hmm: emission dimensions differ across states");
    }
    transitions_ = Matrix::Zero(n, n);
    for (Eigen::Index q = 0; q < n; ++q) {
      const double stay = q + 1 == n ? 1.0 : self_loops(q);
      if (!(stay >= 0.0 && stay <= 1.0)) throw InvalidInput("hmm: self-loop probability outside [0, 1]");
      transitions_(q, q) = stay;
      if (q + 1 < n) transitions_(q, q + 1) = 1.0 - stay;
    }
  }

  const std::string& label() const { return label_; }
  int n_states() const { return static_cast<int>(emissions_.size()); }
  int dim() const { return emissions_.front().dim(); }
  const Matrix& transitions() const { return transitions_; }
  const std::vector<Emission>& emissions() const { return emissions_; }
  std::vector<Emission>& emissions() { return emissions_; }
  double self_loop(int q) const { return transitions_(q, q); }

  Vector self_loops() const { return transitions_.diagonal(); }
  void set_self_loops(const Vector& stay) { *this = WordHmm(label_, stay, std::move(emissions_)); }

  // log b_q(x_t), states x frames.
  Matrix emission_log_likelihoods(const Sequence& seq) const {
    if (seq.empty()) throw InvalidInput("hmm: empty observation sequence");
    Matrix b(n_states(), static_cast<Eigen::Index>(seq.size()));
    for (std::size_t t = 0; t < seq.size(); ++t)
      for (int q = 0; q < n_states(); ++q) b(q, static_cast<Eigen::Index>(t)) = emissions_[q].log_pdf(seq[t]);
    return b;
  }

 private:
  std::string label_;
  Matrix transitions_;
  std::vector<Emission> emissions_;
};

// Log-domain forward variables alpha (states x frames).
inline Matrix forward_lattice(const Matrix& log_b, const Vector& stay) {
  const auto n = log_b.rows(), t_len = log_b.cols();
  const Vector log_stay = stay.array().log();
  const Vector log_move = (1.0 - stay.array()).log();
  Matrix alpha = Matrix::Constant(n, t_len, kLogZero);
  alpha(0, 0) = log_b(0, 0);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (Eigen::Index q = 0; q < n && q <= t; ++q) {
      double a = alpha(q, t - 1) + log_stay(q);
      if (q > 0) a = log_add(a, alpha(q - 1, t - 1) + log_move(q - 1));
      alpha(q, t) = a + log_b(q, t);
    }
  }
  return alpha;
}

inline Matrix backward_lattice(const Matrix& log_b, const Vector& stay) {
  const auto n = log_b.rows(), t_len = log_b.cols();
  const Vector log_stay = stay.array().log();
  const Vector log_move = (1.0 - stay.array()).log();
  Matrix beta = Matrix::Constant(n, t_len, kLogZero);
  beta.col(t_len - 1).setZero();
  for (Eigen::Index t = t_len - 2; t >= 0; --t) {
    for (Eigen::Index q = 0; q < n; ++q) {
      double b = log_stay(q) + log_b(q, t + 1) + beta(q, t + 1);
      if (q + 1 < n) b = log_add(b, log_move(q) + log_b(q + 1, t + 1) + beta(q + 1, t + 1));
      beta(q, t) = b;
    }
  }
  return beta;
}

// log p(seq | model), summed over every state the chain can occupy at the end.
template <MixtureEmission E>
double forward_log_likelihood(const WordHmm<E>& model, const typename WordHmm<E>::Sequence& seq) {
  const Matrix alpha = forward_lattice(model.emission_log_likelihoods(seq), model.self_loops());
  return log_sum_exp(alpha.col(alpha.cols() - 1));
}

struct ViterbiResult {
  double log_likelihood = kLogZero;
  std::vector<int> states;
};

template <MixtureEmission E>
ViterbiResult viterbi(const WordHmm<E>& model, const typename WordHmm<E>::Sequence& seq) {
  const Matrix log_b = model.emission_log_likelihoods(seq);
  const auto n = log_b.rows(), t_len = log_b.cols();
  const Vector stay = model.self_loops();
  const Vector log_stay = stay.array().log();
  const Vector log_move = (1.0 - stay.array()).log();
  Matrix delta = Matrix::Constant(n, t_len, kLogZero);
  Eigen::MatrixXi from = Eigen::MatrixXi::Zero(n, t_len);
  delta(0, 0) = log_b(0, 0);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (Eigen::Index q = 0; q < n && q <= t; ++q) {
      double best = delta(q, t - 1) + log_stay(q);
      int arg = static_cast<int>(q);
      if (q > 0 && delta(q - 1, t - 1) + log_move(q - 1) > best) {
        best = delta(q - 1, t - 1) + log_move(q - 1);
        arg = static_cast<int>(q - 1);
      }
      delta(q, t) = best + log_b(q, t);
      from(q, t) = arg;
    }
  }
  ViterbiResult out;
  Eigen::Index q = 0;
  out.log_likelihood = delta.col(t_len - 1).maxCoeff(&q);
  out.states.assign(static_cast<std::size_t>(t_len), 0);
  for (Eigen::Index t = t_len - 1; t >= 0; --t) {
    out.states[static_cast<std::size_t>(t)] = static_cast<int>(q);
    if (t > 0) q = from(q, t);
  }
  return out;
}

}  // namespace sparsehear
