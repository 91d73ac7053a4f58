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
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/hash.hpp"
#include "sparsehear/frontend/cochleogram.hpp"
#include "sparsehear/harness/noise.hpp"
#include "sparsehear/hmm/baum_welch.hpp"
#include "sparsehear/ica/train_hierarchy.hpp"
#include "sparsehear/mfcc/mfcc.hpp"
#include "sparsehear/projection/binarize.hpp"
#include "sparsehear/projection/geometry.hpp"

namespace sparsehear {

struct TrainingCondition {
  std::string condition = "clean";  // clean | multicondition
  std::vector<std::string> noises{"babble", "white"};
  double snr_db = 20.0;

  bool operator==(const TrainingCondition&) const = default;
};

struct EvaluationGrid {
  std::vector<std::string> noises{"babble", "white"};
  std::vector<double> snrs{-5.0, 0.0, 10.0, 20.0, 40.0, kCleanSnr};

  bool operator==(const EvaluationGrid&) const = default;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::string system = "sparse";  // sparse | mfcc
  std::uint64_t seed = 1;
  CochleogramConfig frontend;
  std::vector<LevelSpec> hierarchy;
  HierarchyTrainingOptions ica;  // seed field unused; derived from `seed`
  BinarizePolicy policy;
  MfccConfig mfcc;
  HmmTrainingOptions model;  // seed field unused; derived from `seed`
  TrainingCondition training;
  EvaluationGrid evaluation;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace config_detail {

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: field \"") + key + "\": " + e.what());
  }
}

inline nlohmann::json snr_json(double v) { return v == kCleanSnr ? nlohmann::json("clean") : nlohmann::json(v); }

inline double snr_from_json(const nlohmann::json& v) {
  if (v.is_string()) return parse_snr(v.get<std::string>());
  if (v.is_number()) return v.get<double>();
  throw ConfigError("config: SNR must be a number or \"clean\"");
}

}  // namespace config_detail

inline nlohmann::json to_json(const LevelSpec& s) {
  return {{"components", s.components},         {"window_channels", s.window_channels},
          {"window_ms", s.window_ms},           {"blocks_spectral", s.blocks_spectral},
          {"blocks_temporal", s.blocks_temporal}, {"overlap_spectral", s.overlap_spectral},
          {"overlap_temporal", s.overlap_temporal}, {"max_examples", s.max_examples},
          {"whiten_dim", s.whiten_dim}};
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  using config_detail::snr_json;
  const auto& pe = c.frontend.pre_emphasis;
  const auto& gt = c.frontend.gammatone;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& s : c.hierarchy) levels.push_back(to_json(s));
  nlohmann::json snrs = nlohmann::json::array();
  for (double v : c.evaluation.snrs) snrs.push_back(snr_json(v));
  return {
      {"name", c.name},
      {"system", c.system},
      {"seed", c.seed},
      {"frontend",
       {{"pre_emphasis",
         {{"mode", pe.mode == PreEmphasis::Mode::kMidband ? "midband" : "first_order"},
          {"alpha", pe.alpha},
          {"low_hz", pe.midband_low_hz},
          {"high_hz", pe.midband_high_hz}}},
        {"gammatone",
         {{"channels", gt.n_channels},
          {"f_lo", gt.f_lo},
          {"f_hi", gt.f_hi},
          {"order", gt.order},
          {"bandwidth_factor", gt.bandwidth_factor},
          {"align_phase", gt.align_phase}}},
        {"envelope", {{"lowpass_hz", c.frontend.envelope.lowpass_hz}, {"frame_rate", c.frontend.envelope.frame_rate}}}}},
      {"hierarchy", levels},
      {"ica", {{"contrast", to_string(c.ica.contrast)}, {"max_iter", c.ica.max_iter}, {"tol", c.ica.tol}}},
      {"policy", c.policy.to_string()},
      {"mfcc",
       {{"pre_emphasis", c.mfcc.pre_emphasis},
        {"frame_ms", c.mfcc.frame_ms},
        {"hop_ms", c.mfcc.hop_ms},
        {"filters", c.mfcc.filters},
        {"cepstra", c.mfcc.cepstra},
        {"lifter", c.mfcc.lifter},
        {"delta_window", c.mfcc.delta_window},
        {"cepstral_mean_norm", c.mfcc.cepstral_mean_norm},
        {"low_hz", c.mfcc.low_hz},
        {"high_hz", c.mfcc.high_hz}}},
      {"model",
       {{"n_states", c.model.n_states},
        {"mixtures", c.model.mixtures},
        {"iterations", c.model.iterations},
        {"initial_self_loop", c.model.initial_self_loop},
        {"segment_em_iterations", c.model.segment_em_iterations}}},
      {"training",
       {{"condition", c.training.condition}, {"noises", c.training.noises}, {"snr_db", snr_json(c.training.snr_db)}}},
      {"evaluation", {{"noises", c.evaluation.noises}, {"snr_db", snrs}}},
  };
}

// Throws ConfigError on inconsistent settings.
inline void validate(const ExperimentConfig& c) {
  if (c.system != "sparse" && c.system != "mfcc") throw ConfigError("config: system must be \"sparse\" or \"mfcc\"");
  if (c.system == "sparse") {
    if (c.hierarchy.empty()) throw ConfigError("config: sparse system needs at least one hierarchy level");
    HierarchyGeometry(c.hierarchy, c.frontend.gammatone.n_channels, c.frontend.envelope.frame_rate);
  }
  if (c.model.n_states < 1 || c.model.mixtures < 1 || c.model.iterations < 0 || c.model.segment_em_iterations < 0) {
    throw ConfigError("config: model counts must be positive");
  }
  if (!(c.model.initial_self_loop > 0.0 && c.model.initial_self_loop < 1.0)) {
    throw ConfigError("config: initial self-loop must lie in (0, 1)");
  }
  if (c.training.condition != "clean" && c.training.condition != "multicondition") {
    throw ConfigError("config: training condition must be \"clean\" or \"multicondition\"");
  }
  if (c.training.condition == "multicondition" && c.training.noises.empty()) {
    throw ConfigError("config: multi-condition training needs at least one noise");
  }
  if (c.evaluation.snrs.empty()) throw ConfigError("config: evaluation needs at least one SNR");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c = {}) {
  using config_detail::read;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  read(j, "name", c.name);
  read(j, "system", c.system);
  read(j, "seed", c.seed);
  if (j.contains("frontend")) {
    const auto& f = j["frontend"];
    if (f.contains("pre_emphasis")) {
      const auto& p = f["pre_emphasis"];
      std::string mode = c.frontend.pre_emphasis.mode == PreEmphasis::Mode::kMidband ? "midband" : "first_order";
      read(p, "mode", mode);
      if (mode != "midband" && mode != "first_order") throw ConfigError("config: unknown pre-emphasis mode " + mode);
      c.frontend.pre_emphasis.mode = mode == "midband" ? PreEmphasis::Mode::kMidband : PreEmphasis::Mode::kFirstOrder;
      read(p, "alpha", c.frontend.pre_emphasis.alpha);
      read(p, "low_hz", c.frontend.pre_emphasis.midband_low_hz);
      read(p, "high_hz", c.frontend.pre_emphasis.midband_high_hz);
    }
    if (f.contains("gammatone")) {
      const auto& g = f["gammatone"];
      read(g, "channels", c.frontend.gammatone.n_channels);
      read(g, "f_lo", c.frontend.gammatone.f_lo);
      read(g, "f_hi", c.frontend.gammatone.f_hi);
      read(g, "order", c.frontend.gammatone.order);
      read(g, "bandwidth_factor", c.frontend.gammatone.bandwidth_factor);
      read(g, "align_phase", c.frontend.gammatone.align_phase);
    }
    if (f.contains("envelope")) {
      read(f["envelope"], "lowpass_hz", c.frontend.envelope.lowpass_hz);
      read(f["envelope"], "frame_rate", c.frontend.envelope.frame_rate);
    }
  }
  if (j.contains("hierarchy")) {
    if (!j["hierarchy"].is_array()) throw ConfigError("config: hierarchy must be an array of levels");
    c.hierarchy.clear();
    for (const auto& l : j["hierarchy"]) {
      LevelSpec s;
      read(l, "components", s.components);
      read(l, "window_channels", s.window_channels);
      read(l, "window_ms", s.window_ms);
      read(l, "blocks_spectral", s.blocks_spectral);
      read(l, "blocks_temporal", s.blocks_temporal);
      read(l, "overlap_spectral", s.overlap_spectral);
      read(l, "overlap_temporal", s.overlap_temporal);
      read(l, "max_examples", s.max_examples);
      read(l, "whiten_dim", s.whiten_dim);
      c.hierarchy.push_back(s);
    }
  }
  if (j.contains("ica")) {
    std::string contrast = to_string(c.ica.contrast);
    read(j["ica"], "contrast", contrast);
    c.ica.contrast = contrast_from_string(contrast);
    read(j["ica"], "max_iter", c.ica.max_iter);
    read(j["ica"], "tol", c.ica.tol);
  }
  if (j.contains("policy")) {
    std::string p;
    read(j, "policy", p);
    c.policy = BinarizePolicy::parse(p);
  }
  if (j.contains("mfcc")) {
    const auto& m = j["mfcc"];
    read(m, "pre_emphasis", c.mfcc.pre_emphasis);
    read(m, "frame_ms", c.mfcc.frame_ms);
    read(m, "hop_ms", c.mfcc.hop_ms);
    read(m, "filters", c.mfcc.filters);
    read(m, "cepstra", c.mfcc.cepstra);
    read(m, "lifter", c.mfcc.lifter);
    read(m, "delta_window", c.mfcc.delta_window);
    read(m, "cepstral_mean_norm", c.mfcc.cepstral_mean_norm);
    read(m, "low_hz", c.mfcc.low_hz);
    read(m, "high_hz", c.mfcc.high_hz);
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    read(m, "n_states", c.model.n_states);
    read(m, "mixtures", c.model.mixtures);
    read(m, "iterations", c.model.iterations);
    read(m, "initial_self_loop", c.model.initial_self_loop);
    read(m, "segment_em_iterations", c.model.segment_em_iterations);
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    read(t, "condition", c.training.condition);
    read(t, "noises", c.training.noises);
    if (t.contains("snr_db")) c.training.snr_db = config_detail::snr_from_json(t["snr_db"]);
  }
  if (j.contains("evaluation")) {
    const auto& e = j["evaluation"];
    read(e, "noises", c.evaluation.noises);
    if (e.contains("snr_db")) {
      c.evaluation.snrs.clear();
      for (const auto& v : e["snr_db"]) c.evaluation.snrs.push_back(config_detail::snr_from_json(v));
    }
  }
  validate(c);
  return c;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a(to_json(c).dump())); }

inline std::vector<std::string> preset_names() { return {"sparse-exp2", "sparse-exp1", "mfcc-baseline"}; }

// Three-level geometry of the second experiment: 32-channel x 40 ms windows
// at 50% overlap, 2x2 abstract blocks at 25% overlap, K = 64/128/256.
inline std::vector<LevelSpec> exp2_hierarchy() {
  return {{64, 32, 40, 1, 1, 0.5, 0.5, 25000, 64},
          {128, 0, 0, 2, 2, 0.25, 0.25, 25000, 128},
          {256, 0, 0, 2, 2, 0.25, 0.25, 25000, 256}};
}

// Three-level geometry of the first experiment: 16-channel x 40 ms windows,
// no overlap, 2x3 abstract blocks, K = 128/256/256.
inline std::vector<LevelSpec> exp1_hierarchy() {
  return {{128, 16, 40, 1, 1, 0.0, 0.0, 100000, 128},
          {256, 0, 0, 2, 3, 0.0, 0.0, 100000, 256},
          {256, 0, 0, 2, 3, 0.0, 0.0, 50000, 256}};
}

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "sparse-exp2" || name == "sparse-exp1") {
    c.system = "sparse";
    c.hierarchy = name == "sparse-exp2" ? exp2_hierarchy() : exp1_hierarchy();
    c.model.n_states = 16;
    c.model.mixtures = 8;
  } else if (name == "mfcc-baseline") {
    c.system = "mfcc";
    c.model.n_states = 16;
    c.model.mixtures = 4;
  } else {
    throw ConfigError("unknown preset \"" + name + "\"");
  }
  c.model.iterations = 50;
  validate(c);
  return c;
}

// A preset name or a JSON file; a JSON file may name a "preset" to start from.
inline ExperimentConfig load_config(const std::string& name_or_path) {
  for (const auto& p : preset_names())
    if (p == name_or_path) return preset(p);
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("config \"" + name_or_path + "\" is neither a preset nor a readable file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + name_or_path + ": " + e.what());
  }
  ExperimentConfig base;
  if (j.is_object() && j.contains("preset")) base = preset(j["preset"].get<std::string>());
  return config_from_json(j, base);
}

}  // namespace sparsehear
