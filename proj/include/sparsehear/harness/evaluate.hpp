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
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/hash.hpp"
#include "sparsehear/frontend/audio.hpp"
#include "sparsehear/harness/noise.hpp"

namespace sparsehear {

struct TestCondition {
  std::string noise = "clean";
  double snr_db = kCleanSnr;
};

// Every noise at every finite SNR, plus a single clean condition if requested.
inline std::vector<TestCondition> condition_grid(const std::vector<std::string>& noises,
                                                 const std::vector<double>& snrs) {
  std::vector<TestCondition> out;
  for (double snr : snrs) {
    if (snr == kCleanSnr) {
      out.push_back({});
    } else {
      if (noises.empty()) throw ConfigError("condition grid: noisy SNR requested without noises");
      for (const auto& n : noises) out.push_back({n, snr});
    }
  }
  if (out.empty()) throw ConfigError("condition grid is empty");
  return out;
}

struct EvalCell {
  std::string system;
  std::string noise;
  std::string snr;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][hypothesis]

  double rate() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / total; }
};

struct EvaluationReport {
  std::vector<std::string> vocabulary;
  std::vector<EvalCell> cells;
  nlohmann::json extra = nlohmann::json::object();  // provenance (config hash, seed, timings)

  const EvalCell* find(const std::string& system, const std::string& noise, const std::string& snr) const {
    for (const auto& c : cells)
      if (c.system == system && c.noise == noise && c.snr == snr) return &c;
    return nullptr;
  }

  double rate(const std::string& system, const std::string& noise, const std::string& snr) const {
    const auto* c = find(system, noise, snr);
    if (!c) throw InvalidInput("report has no cell " + system + "/" + noise + "/" + snr);
    return c->rate();
  }

  nlohmann::json to_json() const {
    nlohmann::json results = nlohmann::json::object();
    nlohmann::json detail = nlohmann::json::array();
    for (const auto& c : cells) {
      results[c.system][c.noise][c.snr] = c.rate();
      detail.push_back({{"system", c.system},
                        {"noise", c.noise},
                        {"snr_db", c.snr},
                        {"correct", c.correct},
                        {"total", c.total},
                        {"rate", c.rate()},
                        {"confusion", c.confusion}});
    }
    return {{"vocabulary", vocabulary}, {"results", results}, {"cells", detail}, {"extra", extra}};
  }

  static EvaluationReport from_json(const nlohmann::json& j) {
    EvaluationReport r;
    try {
      r.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
      for (const auto& c : j.at("cells")) {
        r.cells.push_back({c.at("system"), c.at("noise"), c.at("snr_db"), c.at("correct"), c.at("total"),
                           c.at("confusion").get<std::vector<std::vector<std::size_t>>>()});
      }
      if (j.contains("extra")) r.extra = j["extra"];
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("report: ") + e.what());
    }
    return r;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "system,noise,snr_db,correct,total,rate\n";
    for (const auto& c : cells) {
      out << c.system << ',' << c.noise << ',' << c.snr << ',' << c.correct << ',' << c.total << ',' << c.rate()
          << '\n';
    }
    return out.str();
  }

  void merge(const EvaluationReport& other) {
    if (vocabulary.empty()) vocabulary = other.vocabulary;
    cells.insert(cells.end(), other.cells.begin(), other.cells.end());
  }
};

struct TestItem {
  const AudioSignal* audio;
  std::size_t label;  // index into the vocabulary
};

// Returns the vocabulary index chosen for an utterance.
using Classifier = std::function<std::size_t(const AudioSignal&)>;

// Noisy copy of one test utterance; seeds depend on the condition and item index only.
inline AudioSignal corrupt(const AudioSignal& clean, const TestCondition& cond, std::size_t item, std::uint64_t seed) {
  if (cond.snr_db == kCleanSnr) return clean;
  const auto s = derive_seed(derive_seed(seed, fnv1a(cond.noise)), item);
  const AudioSignal noise = make_noise(cond.noise, clean.size(), clean.sample_rate, s);
  return mix_noise(clean, noise, cond.snr_db, derive_seed(s, 1)).signal;
}

inline EvaluationReport evaluate(const std::string& system, const Classifier& classify,
                                 const std::vector<TestItem>& items, const std::vector<std::string>& vocabulary,
                                 const std::vector<TestCondition>& conditions, std::uint64_t seed) {
  if (items.empty()) throw InvalidInput("evaluate: empty test set");
  EvaluationReport report;
  report.vocabulary = vocabulary;
  const std::size_t v = vocabulary.size();
  for (const auto& cond : conditions) {
    EvalCell cell{system, cond.noise, snr_label(cond.snr_db), 0, 0, std::vector<std::vector<std::size_t>>(v, std::vector<std::size_t>(v, 0))};
    for (std::size_t k = 0; k < items.size(); ++k) {
      const auto& it = items[k];
      if (it.label >= v) throw InvalidInput("evaluate: label index outside the vocabulary");
      const std::size_t hyp = classify(corrupt(*it.audio, cond, k, seed));
      if (hyp >= v) throw InvalidInput("evaluate: classifier returned an index outside the vocabulary");
      ++cell.confusion[it.label][hyp];
      cell.correct += hyp == it.label;
      ++cell.total;
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

}  // namespace sparsehear
