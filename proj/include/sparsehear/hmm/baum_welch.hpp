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
#include <random>
#include <string>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/hash.hpp"
#include "sparsehear/hmm/word_hmm.hpp"

namespace sparsehear {

struct HmmTrainingOptions {
  int n_states = 16;
  int mixtures = 8;
  int iterations = 50;
  double initial_self_loop = 0.6;
  int segment_em_iterations = 5;  // per-state EM on the flat-start segmentation
  std::uint64_t seed = 0;

  bool operator==(const HmmTrainingOptions&) const = default;
};

struct WordTrainingReport {
  std::string label;
  std::size_t sequences = 0;
  std::size_t skipped = 0;
  std::vector<double> log_likelihoods;  // per Baum-Welch iteration, then final
};

// Flat start: every usable sequence is cut into n_states equal segments
// and each state's mixture is initialized from its segments.
template <MixtureEmission E>
WordHmm<E> flat_start(const std::string& label, const std::vector<const typename WordHmm<E>::Sequence*>& seqs,
                      int dim, const HmmTrainingOptions& opt, std::uint64_t seed) {
  if (opt.n_states < 1 || opt.mixtures < 1) throw ConfigError("hmm: need n_states >= 1 and mixtures >= 1");
  if (seqs.empty()) throw InvalidInput("hmm: word \"" + label + "\" has no usable training sequence");
  std::mt19937_64 rng(seed);
  std::vector<E> emissions;
  for (int q = 0; q < opt.n_states; ++q) {
    std::vector<const typename E::Observation*> frames;
    std::vector<typename E::Observation> copy;
    for (const auto* s : seqs) {
      const std::size_t t_len = s->size();
      const std::size_t lo = q * t_len / opt.n_states, hi = (q + 1) * t_len / opt.n_states;
      for (std::size_t t = lo; t < hi; ++t) {
        frames.push_back(&(*s)[t]);
        copy.push_back((*s)[t]);
      }
    }
    const int m = std::min<int>(opt.mixtures, static_cast<int>(frames.size()));
    E e = E::initialize(std::max(m, 1), dim, frames, rng);
    if (opt.segment_em_iterations > 0 && copy.size() >= static_cast<std::size_t>(e.components())) {
      e = em_fit(std::move(e), copy, opt.segment_em_iterations).mixture;
    }
    if (e.components() < opt.mixtures) {
      warn("hmm: word \"" + label + "\" state " + std::to_string(q) + " has only " + std::to_string(frames.size()) +
           " frames; using " + std::to_string(e.components()) + " mixture components");
    }
    emissions.push_back(std::move(e));
  }
  return WordHmm<E>(label, Vector::Constant(opt.n_states, opt.initial_self_loop), std::move(emissions));
}

// One Baum-Welch pass over `seqs`; returns the total log-likelihood under
// the parameters before the update.
template <MixtureEmission E>
double baum_welch_step(WordHmm<E>& model, const std::vector<const typename WordHmm<E>::Sequence*>& seqs) {
  const int n = model.n_states();
  std::vector<typename E::Stats> stats;
  for (const auto& e : model.emissions()) stats.push_back(e.make_stats());
  Vector stay_count = Vector::Zero(n), move_count = Vector::Zero(n);
  const Vector stay = model.self_loops();
  const Vector log_stay = stay.array().log(), log_move = (1.0 - stay.array()).log();
  double total = 0.0;
  for (const auto* seq : seqs) {
    const Matrix log_b = model.emission_log_likelihoods(*seq);
    const Matrix alpha = forward_lattice(log_b, stay);
    const Matrix beta = backward_lattice(log_b, stay);
    const auto t_len = log_b.cols();
    const double ll = log_sum_exp(alpha.col(t_len - 1));
    if (!std::isfinite(ll)) throw NumericError("hmm: sequence has zero likelihood under word \"" + model.label() + "\"");
    total += ll;
    for (Eigen::Index t = 0; t < t_len; ++t) {
      for (int q = 0; q < n; ++q) {
        const double gamma = std::exp(alpha(q, t) + beta(q, t) - ll);
        if (gamma > 0.0) model.emissions()[q].accumulate(stats[q], (*seq)[static_cast<std::size_t>(t)], gamma);
        if (t + 1 < t_len) {
          stay_count(q) += std::exp(alpha(q, t) + log_stay(q) + log_b(q, t + 1) + beta(q, t + 1) - ll);
          if (q + 1 < n) {
            move_count(q) += std::exp(alpha(q, t) + log_move(q) + log_b(q + 1, t + 1) + beta(q + 1, t + 1) - ll);
          }
        }
      }
    }
  }
  Vector new_stay = stay;
  for (int q = 0; q + 1 < n; ++q) {
    const double occ = stay_count(q) + move_count(q);
    if (occ > 1e-12) new_stay(q) = stay_count(q) / occ;
  }
  for (int q = 0; q < n; ++q) {
    if (!model.emissions()[q].maximize(stats[q])) {
      warn("hmm: word \"" + model.label() + "\" state " + std::to_string(q) +
           " has zero occupancy; emission left unchanged");
    }
  }
  model.set_self_loops(new_stay);
  return total;
}

// Sequences shorter than the state count are skipped with a warning.
template <MixtureEmission E>
std::vector<const typename WordHmm<E>::Sequence*> usable_sequences(const std::string& label,
                                                                   const std::vector<typename WordHmm<E>::Sequence>& seqs,
                                                                   int n_states, std::size_t* skipped = nullptr) {
  std::vector<const typename WordHmm<E>::Sequence*> out;
  std::size_t dropped = 0;
  for (const auto& s : seqs) {
    if (s.size() < static_cast<std::size_t>(n_states)) {
      ++dropped;
    } else {
      out.push_back(&s);
    }
  }
  if (dropped > 0) {
    warn("hmm: word \"" + label + "\": skipped " + std::to_string(dropped) + " sequence(s) shorter than " +
         std::to_string(n_states) + " frames");
  }
  if (skipped) *skipped = dropped;
  return out;
}

// Runs `iterations` Baum-Welch passes; returns the likelihood trace
// (one entry per pass plus the final model's).
template <MixtureEmission E>
std::vector<double> baum_welch(WordHmm<E>& model, const std::vector<const typename WordHmm<E>::Sequence*>& seqs,
                               int iterations) {
  if (seqs.empty()) throw InvalidInput("baum_welch: no training sequences for \"" + model.label() + "\"");
  std::vector<double> trace;
  for (int it = 0; it < iterations; ++it) trace.push_back(baum_welch_step(model, seqs));
  double final_ll = 0.0;
  for (const auto* s : seqs) final_ll += forward_log_likelihood(model, *s);
  trace.push_back(final_ll);
  return trace;
}

template <MixtureEmission E>
WordHmm<E> train_word(const std::string& label, const std::vector<typename WordHmm<E>::Sequence>& seqs, int dim,
                      const HmmTrainingOptions& opt, WordTrainingReport* report = nullptr) {
  std::size_t skipped = 0;
  const auto usable = usable_sequences<E>(label, seqs, opt.n_states, &skipped);
  auto model = flat_start<E>(label, usable, dim, opt, derive_seed(opt.seed, fnv1a(label)));
  auto trace = baum_welch(model, usable, opt.iterations);
  if (report) *report = {label, usable.size(), skipped, std::move(trace)};
  return model;
}

}  // namespace sparsehear
