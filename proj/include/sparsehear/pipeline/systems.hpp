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
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/hash.hpp"
#include "sparsehear/frontend/cochleogram.hpp"
#include "sparsehear/harness/evaluate.hpp"
#include "sparsehear/harness/manifest.hpp"
#include "sparsehear/harness/noise.hpp"
#include "sparsehear/harness/profile.hpp"
#include "sparsehear/harness/synth_corpus.hpp"
#include "sparsehear/hmm/recognizer.hpp"
#include "sparsehear/ica/train_hierarchy.hpp"
#include "sparsehear/mfcc/mfcc.hpp"
#include "sparsehear/mixtures/bernoulli.hpp"
#include "sparsehear/mixtures/gaussian.hpp"
#include "sparsehear/pipeline/config.hpp"
#include "sparsehear/projection/binarize.hpp"
#include "sparsehear/projection/hierarchy.hpp"

namespace sparsehear {

// Seed streams derived from the experiment seed.
inline constexpr std::uint64_t kDictionaryStream = 1;
inline constexpr std::uint64_t kModelStream = 2;
inline constexpr std::uint64_t kMulticonditionStream = 3;
inline constexpr std::uint64_t kEvaluationStream = 4;

struct LabeledAudio {
  AudioSignal audio;
  std::string label;
  std::string speaker;
};

struct Corpus {
  std::vector<LabeledAudio> train;
  std::vector<LabeledAudio> test;

  // Labels in order of first appearance, training split first.
  std::vector<std::string> vocabulary() const {
    std::vector<std::string> out;
    for (const auto* split : {&train, &test})
      for (const auto& u : *split)
        if (std::find(out.begin(), out.end(), u.label) == out.end()) out.push_back(u.label);
    return out;
  }
};

inline Corpus load_corpus(const CorpusManifest& m) {
  Corpus c;
  for (const auto& e : m.entries) {
    (e.split == "test" ? c.test : c.train).push_back({load_entry(m, e), e.label, e.speaker});
  }
  return c;
}

inline Corpus corpus_from_synth(const std::vector<SynthUtterance>& utts) {
  Corpus c;
  for (const auto& u : utts) (u.split == "test" ? c.test : c.train).push_back({u.audio, u.label, u.speaker});
  return c;
}

// Content hash over labels, sample rates and samples.
inline std::uint64_t corpus_hash(const std::vector<LabeledAudio>& split) {
  std::uint64_t h = fnv1a("corpus");
  for (const auto& u : split) {
    h = derive_seed(h, fnv1a(u.label));
    h = derive_seed(h, fnv1a(std::string_view(reinterpret_cast<const char*>(&u.audio.sample_rate), sizeof(double))));
    h = derive_seed(h, fnv1a(std::string_view(reinterpret_cast<const char*>(u.audio.samples.data()),
                                              u.audio.samples.size() * sizeof(double))));
  }
  return h;
}

// Same assignment rule as build_multicondition: one seeded-random noise per utterance.
inline void apply_multicondition(std::vector<LabeledAudio>& train, const std::vector<std::string>& noises,
                                 double snr_db, std::uint64_t seed) {
  if (noises.empty()) throw ConfigError("multi-condition: at least one noise required");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, noises.size() - 1);
  for (std::size_t k = 0; k < train.size(); ++k) {
    const std::string& name = noises[pick(rng)];
    const auto s = derive_seed(seed, k + 1);
    if (snr_db == kCleanSnr) continue;
    auto& a = train[k].audio;
    a = mix_noise(a, make_noise(name, a.size(), a.sample_rate, s), snr_db, derive_seed(s, 1)).signal;
  }
}

// Training audio as configured: clean, or mixed for multi-condition training.
inline std::vector<LabeledAudio> training_audio(const ExperimentConfig& cfg, const Corpus& corpus) {
  auto train = corpus.train;
  if (cfg.training.condition == "multicondition") {
    apply_multicondition(train, cfg.training.noises, cfg.training.snr_db, derive_seed(cfg.seed, kMulticonditionStream));
  }
  return train;
}

// Per-utterance classification with optional stage timing.
class WordRecognizer {
 public:
  virtual ~WordRecognizer() = default;
  virtual std::string system() const = 0;
  virtual const std::vector<std::string>& vocabulary() const = 0;
  virtual RecognitionResult recognize(const AudioSignal& audio, StageClock* clock = nullptr) const = 0;
  virtual std::vector<std::string> stages() const = 0;
};

namespace system_detail {

template <class F>
decltype(auto) timed(StageClock* clock, const char* stage, F&& f) {
  if (clock) return clock->time(stage, std::forward<F>(f));
  return f();
}

template <class E>
std::vector<std::string> labels_of(const Recognizer<E>& rec) {
  std::vector<std::string> out;
  for (const auto& w : rec.words()) out.push_back(w.label());
  return out;
}

}  // namespace system_detail

// Cochleogram, hierarchical projection, per-level binarization, Bernoulli-mixture HMMs.
class SparseSystem : public WordRecognizer {
 public:
  SparseSystem(ExperimentConfig cfg, DictionaryHierarchy dictionary, Recognizer<BernoulliMixture> models)
      : cfg_(std::move(cfg)), dictionary_(std::move(dictionary)), models_(std::move(models)),
        vocabulary_(system_detail::labels_of(models_)) {}

  static HierarchyGeometry geometry(const ExperimentConfig& cfg) {
    return HierarchyGeometry(cfg.hierarchy, cfg.frontend.gammatone.n_channels, cfg.frontend.envelope.frame_rate);
  }

  static HierarchyTrainingResult train_dictionary(const ExperimentConfig& cfg, const std::vector<LabeledAudio>& train) {
    if (train.empty()) throw InvalidInput("no training audio");
    std::vector<Cochleogram> cochs;
    cochs.reserve(train.size());
    for (const auto& u : train) cochs.push_back(compute_cochleogram(u.audio, cfg.frontend));
    HierarchyTrainingOptions opt = cfg.ica;
    opt.seed = derive_seed(cfg.seed, kDictionaryStream);
    return train_hierarchy(cochs, geometry(cfg), opt);
  }

  static BinaryFeatureSequence features(const ExperimentConfig& cfg, const DictionaryHierarchy& dict,
                                        const AudioSignal& audio, StageClock* clock = nullptr) {
    using system_detail::timed;
    const auto coch = timed(clock, "cochleogram", [&] { return compute_cochleogram(audio, cfg.frontend); });
    const auto proj = timed(clock, "projection", [&] { return project_hierarchy(coch, dict); });
    return timed(clock, "binarization", [&] { return binarize_sequence(proj, dict.geometry, cfg.policy); });
  }

  static Recognizer<BernoulliMixture> train_models(const ExperimentConfig& cfg, const DictionaryHierarchy& dict,
                                                   const std::vector<LabeledAudio>& train,
                                                   std::vector<WordTrainingReport>* reports = nullptr) {
    std::vector<std::string> labels;
    std::vector<std::vector<ActiveSet>> seqs;
    for (const auto& u : train) {
      labels.push_back(u.label);
      seqs.push_back(features(cfg, dict, u.audio).frames);
    }
    HmmTrainingOptions opt = cfg.model;
    opt.seed = derive_seed(cfg.seed, kModelStream);
    return train_recognizer<BernoulliMixture>(labels, seqs, dict.geometry.total_frame_dim(), opt, reports);
  }

  std::string system() const override { return "sparse"; }
  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }
  std::vector<std::string> stages() const override { return {"cochleogram", "projection", "binarization", "decoding"}; }

  RecognitionResult recognize(const AudioSignal& audio, StageClock* clock = nullptr) const override {
    const auto seq = features(cfg_, dictionary_, audio, clock);
    return system_detail::timed(clock, "decoding", [&] { return models_.recognize(seq.frames); });
  }

  const DictionaryHierarchy& dictionary() const { return dictionary_; }
  const Recognizer<BernoulliMixture>& models() const { return models_; }

 private:
  ExperimentConfig cfg_;
  DictionaryHierarchy dictionary_;
  Recognizer<BernoulliMixture> models_;
  std::vector<std::string> vocabulary_;
};

// 39-dimensional MFCCs with diagonal Gaussian-mixture HMMs.
class MfccSystem : public WordRecognizer {
 public:
  MfccSystem(ExperimentConfig cfg, Recognizer<GaussianMixture> models)
      : cfg_(std::move(cfg)), models_(std::move(models)), vocabulary_(system_detail::labels_of(models_)) {}

  static int feature_dim(const MfccConfig& m) { return 3 * (m.cepstra + 1); }

  static std::vector<Vector> features(const ExperimentConfig& cfg, const AudioSignal& audio,
                                      StageClock* clock = nullptr) {
    return system_detail::timed(clock, "mfcc", [&] { return mfcc(audio, cfg.mfcc).frames; });
  }

  static Recognizer<GaussianMixture> train_models(const ExperimentConfig& cfg, const std::vector<LabeledAudio>& train,
                                                  std::vector<WordTrainingReport>* reports = nullptr) {
    std::vector<std::string> labels;
    std::vector<std::vector<Vector>> seqs;
    for (const auto& u : train) {
      labels.push_back(u.label);
      seqs.push_back(features(cfg, u.audio));
    }
    HmmTrainingOptions opt = cfg.model;
    opt.seed = derive_seed(cfg.seed, kModelStream);
    return train_recognizer<GaussianMixture>(labels, seqs, feature_dim(cfg.mfcc), opt, reports);
  }

  std::string system() const override { return "mfcc"; }
  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }
  std::vector<std::string> stages() const override { return {"mfcc", "decoding"}; }

  RecognitionResult recognize(const AudioSignal& audio, StageClock* clock = nullptr) const override {
    const auto seq = features(cfg_, audio, clock);
    return system_detail::timed(clock, "decoding", [&] { return models_.recognize(seq); });
  }

  const Recognizer<GaussianMixture>& models() const { return models_; }

 private:
  ExperimentConfig cfg_;
  Recognizer<GaussianMixture> models_;
  std::vector<std::string> vocabulary_;
};

// Evaluates a trained system on the test split over the configured grid.
inline EvaluationReport evaluate_system(const WordRecognizer& rec, const ExperimentConfig& cfg,
                                        const std::vector<LabeledAudio>& test) {
  const auto& vocab = rec.vocabulary();
  std::vector<TestItem> items;
  for (const auto& u : test) {
    const auto it = std::find(vocab.begin(), vocab.end(), u.label);
    if (it == vocab.end()) throw InvalidInput("test label \"" + u.label + "\" has no trained model");
    items.push_back({&u.audio, static_cast<std::size_t>(it - vocab.begin())});
  }
  const auto classify = [&](const AudioSignal& a) { return rec.recognize(a).index; };
  return evaluate(rec.system(), classify, items, vocab, condition_grid(cfg.evaluation.noises, cfg.evaluation.snrs),
                  derive_seed(cfg.seed, kEvaluationStream));
}

// Real-time factor per stage over a set of utterances.
inline RealtimeReport profile_system(const WordRecognizer& rec, const std::vector<const AudioSignal*>& audio) {
  if (audio.empty()) throw InvalidInput("profile: no audio");
  StageClock clock;
  for (const auto& s : rec.stages()) clock.add(s, 0.0);
  double seconds = 0.0;
  for (const auto* a : audio) {
    seconds += a->duration();
    rec.recognize(*a, &clock);
  }
  return realtime_factor(clock.timings(), seconds);
}

}  // namespace sparsehear
