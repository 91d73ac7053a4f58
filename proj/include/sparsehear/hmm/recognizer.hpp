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
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sparsehear/core/binary_io.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/hmm/baum_welch.hpp"
#include "sparsehear/hmm/word_hmm.hpp"

namespace sparsehear {

struct RecognitionResult {
  std::size_t index = 0;
  std::string label;
  std::vector<double> scores;  // per vocabulary entry
};

// Whole-word maximum-likelihood classifier.
template <MixtureEmission E>
class Recognizer {
 public:
  using Sequence = typename WordHmm<E>::Sequence;

  Recognizer() = default;
  explicit Recognizer(std::vector<WordHmm<E>> words) : words_(std::move(words)) {
    for (const auto& w : words_) {
      if (w.dim() != words_.front().dim()) throw ShapeError("recognizer: word models disagree on feature dimension");
    }
  }

  const std::vector<WordHmm<E>>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  int dim() const { return words_.empty() ? 0 : words_.front().dim(); }
  static constexpr const char* kind() { return E::kKind; }

  // Forward scoring by default; Viterbi on request. Ties go to the earlier word.
  RecognitionResult recognize(const Sequence& seq, bool use_viterbi = false) const {
    if (words_.empty()) throw ConfigError("recognizer: empty vocabulary");
    RecognitionResult out;
    for (const auto& w : words_) {
      out.scores.push_back(use_viterbi ? viterbi(w, seq).log_likelihood : forward_log_likelihood(w, seq));
    }
    out.index = argmax(out.scores);
    out.label = words_[out.index].label();
    return out;
  }

  static std::size_t argmax(const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
      if (scores[k] > scores[best]) best = k;
    return best;
  }

 private:
  std::vector<WordHmm<E>> words_;
};

// Trains one model per distinct label, in order of first appearance.
template <MixtureEmission E>
Recognizer<E> train_recognizer(const std::vector<std::string>& labels,
                               const std::vector<typename WordHmm<E>::Sequence>& seqs, int dim,
                               const HmmTrainingOptions& opt, std::vector<WordTrainingReport>* reports = nullptr) {
  if (labels.size() != seqs.size()) throw ShapeError("train_recognizer: labels and sequences differ in count");
  std::vector<std::string> order;
  std::map<std::string, std::vector<typename WordHmm<E>::Sequence>> by_word;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    auto [it, fresh] = by_word.try_emplace(labels[k]);
    if (fresh) order.push_back(labels[k]);
    it->second.push_back(seqs[k]);
  }
  std::vector<WordHmm<E>> words;
  for (const auto& label : order) {
    WordTrainingReport rep;
    words.push_back(train_word<E>(label, by_word[label], dim, opt, &rep));
    if (reports) reports->push_back(std::move(rep));
  }
  return Recognizer<E>(std::move(words));
}

inline constexpr std::uint32_t kModelVersion = 1;

// "WHMM", u32 version, u32 word count, then per word: label, u32 n_states,
// transition matrix (f64, row-major), u32 emission tag, per-state mixtures.
template <MixtureEmission E>
void write_recognizer(std::ostream& out, const Recognizer<E>& rec) {
  io::write_magic(out, "WHMM");
  io::write_u32(out, kModelVersion);
  io::write_u32(out, static_cast<std::uint32_t>(rec.size()));
  for (const auto& w : rec.words()) {
    io::write_string(out, w.label());
    io::write_u32(out, static_cast<std::uint32_t>(w.n_states()));
    for (int q = 0; q < w.n_states(); ++q)
      for (int r = 0; r < w.n_states(); ++r) io::write_f64(out, w.transitions()(q, r));
    io::write_u32(out, E::kTag);
    for (const auto& e : w.emissions()) e.write(out);
  }
}

// Emission tag of the first word, leaving the stream at its start.
inline std::uint32_t peek_model_tag(std::istream& in) {
  const auto start = in.tellg();
  io::expect_magic(in, "WHMM");
  if (io::read_u32(in) != kModelVersion) throw FormatError("WHMM: unsupported version");
  if (io::read_u32(in) == 0) throw FormatError("WHMM: empty vocabulary");
  io::read_string(in);
  const auto n = io::read_u32(in);
  if (n == 0 || n > 4096) throw FormatError("WHMM: corrupt state count");
  in.seekg(static_cast<std::streamoff>(n) * n * 8, std::ios::cur);
  const auto tag = io::read_u32(in);
  in.clear();
  in.seekg(start);
  return tag;
}

template <MixtureEmission E>
Recognizer<E> read_recognizer(std::istream& in) {
  io::expect_magic(in, "WHMM");
  const auto version = io::read_u32(in);
  if (version != kModelVersion) throw FormatError("WHMM: unsupported version " + std::to_string(version));
  const auto count = io::read_u32(in);
  if (count == 0 || count > 100000) throw FormatError("WHMM: implausible vocabulary size");
  std::vector<WordHmm<E>> words;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string label = io::read_string(in);
    const auto n = io::read_u32(in);
    if (n == 0 || n > 4096) throw FormatError("WHMM: corrupt state count");
    Matrix a(n, n);
    for (std::uint32_t q = 0; q < n; ++q)
      for (std::uint32_t r = 0; r < n; ++r) a(q, r) = io::read_f64(in);
    for (std::uint32_t q = 0; q < n; ++q) {
      for (std::uint32_t r = 0; r < n; ++r) {
        if (r != q && r != q + 1 && a(q, r) != 0.0) throw FormatError("WHMM: transition outside left-right band");
      }
    }
    const auto tag = io::read_u32(in);
    if (tag != E::kTag) {
      throw FormatError("WHMM: word \"" + label + "\" has emission tag " + std::to_string(tag) + ", expected " +
                        std::to_string(E::kTag));
    }
    std::vector<E> emissions;
    for (std::uint32_t q = 0; q < n; ++q) emissions.push_back(E::read(in));
    words.emplace_back(std::move(label), Vector(a.diagonal()), std::move(emissions));
  }
  return Recognizer<E>(std::move(words));
}

}  // namespace sparsehear
