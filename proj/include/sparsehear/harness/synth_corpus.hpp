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
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/hash.hpp"
#include "sparsehear/frontend/audio.hpp"
#include "sparsehear/harness/manifest.hpp"
#include "sparsehear/harness/synth.hpp"

namespace sparsehear {

// Formant-synthesized pseudo-words standing in for a spoken-digit corpus.
struct SynthCorpusConfig {
  int classes = 10;
  int speakers = 4;
  int train_per_class = 20;
  int test_per_class = 20;
  std::uint64_t seed = 1;
  double sample_rate = 16000.0;
};

struct SynthUtterance {
  AudioSignal audio;
  std::string label;
  std::string speaker;
  std::string split;
};

namespace synth_detail {

enum class Onset { kNone, kFricative, kPlosive, kNasal };

struct Syllable {
  Onset onset;
  double onset_hz;  // frication or burst centre
  int vowel;
};

struct Word {
  Syllable first, second;
};

inline const double kVowels[8][3] = {{270, 2290, 3010}, {530, 1840, 2480}, {730, 1090, 2440}, {570, 840, 2410},
                                     {300, 870, 2240},  {660, 1720, 2410}, {490, 1350, 1690}, {390, 1990, 2550}};

inline Word word(int index, std::uint64_t seed) {
  static const Word table[10] = {
      {{Onset::kFricative, 4800, 2}, {Onset::kNasal, 0, 0}},    {{Onset::kPlosive, 1500, 3}, {Onset::kNone, 0, 1}},
      {{Onset::kNone, 0, 0}, {Onset::kFricative, 3500, 4}},     {{Onset::kNasal, 0, 2}, {Onset::kPlosive, 3000, 5}},
      {{Onset::kPlosive, 3500, 0}, {Onset::kNasal, 0, 3}},      {{Onset::kFricative, 6000, 1}, {Onset::kNone, 0, 2}},
      {{Onset::kNone, 0, 4}, {Onset::kPlosive, 1500, 0}},       {{Onset::kNasal, 0, 6}, {Onset::kFricative, 4800, 2}},
      {{Onset::kPlosive, 2500, 5}, {Onset::kNone, 0, 4}},       {{Onset::kFricative, 3500, 3}, {Onset::kNasal, 0, 7}},
  };
  if (index < 10) return table[index];
  std::mt19937_64 rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(index)));
  std::uniform_int_distribution<int> onset(0, 3), vowel(0, 7);
  std::uniform_real_distribution<double> hz(1500.0, 6000.0);
  return {{static_cast<Onset>(onset(rng)), hz(rng), vowel(rng)}, {static_cast<Onset>(onset(rng)), hz(rng), vowel(rng)}};
}

struct Speaker {
  double f0, formant_scale, rate;
};

inline Speaker speaker(int index, std::uint64_t seed) {
  static const Speaker table[4] = {{110, 1.0, 1.0}, {150, 0.94, 1.1}, {205, 1.08, 0.92}, {240, 1.14, 1.05}};
  if (index < 4) return table[index];
  std::mt19937_64 rng(derive_seed(seed, 2000 + static_cast<std::uint64_t>(index)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {100.0 + 160.0 * u(rng), 0.92 + 0.24 * u(rng), 0.9 + 0.2 * u(rng)};
}

inline void append(std::vector<double>& out, std::vector<double> seg, double rms, double fs) {
  scale_to_rms(seg, rms);
  apply_ramps(seg, static_cast<std::size_t>(0.008 * fs));
  out.insert(out.end(), seg.begin(), seg.end());
}

}  // namespace synth_detail

// One utterance of pseudo-word `word_index` by pseudo-speaker `speaker_index`.
inline AudioSignal synthesize_word(int word_index, int speaker_index, std::uint64_t seed, std::uint64_t corpus_seed = 1,
                                   double fs = 16000.0) {
  using namespace synth_detail;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto jitter = [&](double amount) { return 1.0 + amount * (2.0 * u(rng) - 1.0); };
  const Word w = word(word_index, corpus_seed);
  const Speaker spk = speaker(speaker_index, corpus_seed);
  const double rate = spk.rate * jitter(0.08);
  const double f0 = spk.f0 * jitter(0.06);
  std::vector<double> out(static_cast<std::size_t>((0.06 + 0.1 * u(rng)) * fs), 0.0);
  std::vector<double> prev{500 * spk.formant_scale, 1500 * spk.formant_scale, 2500 * spk.formant_scale};
  int syllable = 0;
  for (const Syllable& s : {w.first, w.second}) {
    const double f0_here = f0 * (syllable == 0 ? 1.0 : 0.88);
    std::vector<double> target(3);
    for (int f = 0; f < 3; ++f) target[f] = kVowels[s.vowel][f] * spk.formant_scale * jitter(0.04);
    switch (s.onset) {
      case Onset::kFricative:
        append(out, synthesize_noise_band(0.09 * rate * jitter(0.1), s.onset_hz * jitter(0.05), 1200.0, fs, rng), 0.04,
               fs);
        break;
      case Onset::kPlosive:
        out.insert(out.end(), static_cast<std::size_t>(0.04 * rate * fs), 0.0);
        append(out, synthesize_noise_band(0.018, s.onset_hz * jitter(0.05), 900.0, fs, rng), 0.075, fs);
        prev = {300 * spk.formant_scale, s.onset_hz * 0.6, 2600 * spk.formant_scale};
        break;
      case Onset::kNasal: {
        VoicedSegment nasal;
        nasal.seconds = 0.07 * rate * jitter(0.1);
        nasal.f0_start = nasal.f0_end = f0_here;
        nasal.to = {260.0 * spk.formant_scale, 1100.0 * spk.formant_scale, 2300.0 * spk.formant_scale};
        nasal.bandwidths = {60, 300, 300};
        append(out, synthesize_voiced(nasal, fs, rng), 0.025, fs);
        prev = nasal.to;
        break;
      }
      case Onset::kNone:
        break;
    }
    VoicedSegment v;
    v.seconds = 0.19 * rate * jitter(0.1);
    v.f0_start = f0_here;
    v.f0_end = f0_here * 0.9;
    v.from = prev;
    v.to = target;
    v.bandwidths = {70, 100, 150};
    v.transition = 0.35;
    append(out, synthesize_voiced(v, fs, rng), 0.1 * jitter(0.2), fs);
    prev = target;
    ++syllable;
    if (syllable == 1) out.insert(out.end(), static_cast<std::size_t>(0.03 * rate * fs), 0.0);
  }
  out.insert(out.end(), static_cast<std::size_t>((0.06 + 0.1 * u(rng)) * fs), 0.0);
  std::normal_distribution<double> floor(0.0, 1e-4);
  for (auto& x : out) x += floor(rng);
  AudioSignal a;
  a.samples = std::move(out);
  a.sample_rate = fs;
  return a;
}

inline std::string synth_label(int c) { return "w" + std::to_string(c); }

// Utterances cycle through the speakers; train and test draw independent seeds.
inline std::vector<SynthUtterance> synthesize_corpus(const SynthCorpusConfig& cfg) {
  if (cfg.classes < 1 || cfg.speakers < 1 || cfg.train_per_class < 0 || cfg.test_per_class < 0) {
    throw ConfigError("synth-corpus: counts must be positive");
  }
  std::vector<SynthUtterance> out;
  for (const auto& [split, count, stream] :
       {std::tuple<const char*, int, std::uint64_t>{"train", cfg.train_per_class, 1},
        std::tuple<const char*, int, std::uint64_t>{"test", cfg.test_per_class, 2}}) {
    for (int c = 0; c < cfg.classes; ++c) {
      for (int k = 0; k < count; ++k) {
        const int spk = k % cfg.speakers;
        const auto seed = derive_seed(derive_seed(cfg.seed, stream), static_cast<std::uint64_t>(c) * 100003u + k);
        out.push_back({synthesize_word(c, spk, seed, cfg.seed, cfg.sample_rate), synth_label(c),
                       "s" + std::to_string(spk), split});
      }
    }
  }
  return out;
}

// Writes WAV files plus manifest.json into `dir`; returns the manifest.
inline CorpusManifest write_synth_corpus(const std::filesystem::path& dir, const SynthCorpusConfig& cfg) {
  std::filesystem::create_directories(dir);
  CorpusManifest m{{}, dir};
  std::size_t k = 0;
  for (const auto& u : synthesize_corpus(cfg)) {
    const std::string name = u.split + "_" + u.label + "_" + u.speaker + "_" + std::to_string(k++) + ".wav";
    write_wav((dir / name).string(), u.audio);
    m.entries.push_back({name, u.label, u.speaker, u.split, std::nullopt});
  }
  write_manifest(dir / "manifest.json", m);
  return m;
}

}  // namespace sparsehear
