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
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/hash.hpp"
#include "sparsehear/frontend/audio.hpp"
#include "sparsehear/frontend/filters.hpp"
#include "sparsehear/harness/synth.hpp"

namespace sparsehear {

inline constexpr double kCleanSnr = std::numeric_limits<double>::infinity();

struct NoiseSpec {
  std::string name = "white";  // babble, destroyerengine, volvo, white, or a WAV path
  double snr_db = 20.0;
  std::uint64_t seed = 0;
};

inline const std::vector<std::string>& builtin_noises() {
  static const std::vector<std::string> names{"babble", "destroyerengine", "volvo", "white"};
  return names;
}

inline bool is_builtin_noise(const std::string& name) {
  const auto& n = builtin_noises();
  return std::find(n.begin(), n.end(), name) != n.end();
}

namespace detail {

inline std::vector<double> white_noise(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// Several overlapping voices of random vowel sequences with syllabic
// amplitude modulation.
inline std::vector<double> babble(std::size_t n, double fs, std::mt19937_64& rng) {
  static const double vowels[][3] = {{270, 2290, 3010}, {530, 1840, 2480}, {730, 1090, 2440}, {570, 840, 2410},
                                     {300, 870, 2240},  {660, 1720, 2410}, {490, 1350, 1690}, {390, 1990, 2550}};
  std::uniform_int_distribution<int> pick(0, 7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(n, 0.0);
  for (int voice = 0; voice < 6; ++voice) {
    const double f0 = 100.0 + 150.0 * unit(rng);
    const double scale = 0.9 + 0.25 * unit(rng);
    std::size_t pos = static_cast<std::size_t>(unit(rng) * 0.2 * fs);
    const double* prev = vowels[pick(rng)];
    while (pos < n) {
      const double* v = vowels[pick(rng)];
      VoicedSegment seg;
      seg.seconds = 0.12 + 0.15 * unit(rng);
      seg.f0_start = f0 * (0.9 + 0.2 * unit(rng));
      seg.f0_end = seg.f0_start * 0.92;
      seg.from = {prev[0] * scale, prev[1] * scale, prev[2] * scale};
      seg.to = {v[0] * scale, v[1] * scale, v[2] * scale};
      seg.bandwidths = {80, 110, 160};
      auto syl = synthesize_voiced(seg, fs, rng);
      scale_to_rms(syl, 0.3 + 0.7 * unit(rng));
      apply_ramps(syl, static_cast<std::size_t>(0.03 * fs));
      for (std::size_t t = 0; t < syl.size() && pos + t < n; ++t) out[pos + t] += syl[t];
      pos += syl.size() + static_cast<std::size_t>(unit(rng) * 0.08 * fs);
      prev = v;
    }
  }
  return out;
}

// Low-frequency rumble: integrated noise, low-passed, with slow drift.
inline std::vector<double> volvo(std::size_t n, double fs, std::mt19937_64& rng) {
  auto x = white_noise(n, rng);
  double acc = 0.0;
  for (auto& v : x) {
    acc = 0.995 * acc + v;
    v = acc;
  }
  auto lp = FirstOrderSection::butterworth_lowpass(200.0, fs);
  lp.apply_in_place(x);
  lp.apply_in_place(x);
  return x;
}

// Harmonic engine hum with a slowly wandering fundamental over broadband noise.
inline std::vector<double> destroyer_engine(std::size_t n, double fs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double f0 = 30.0 + 15.0 * unit(rng);
  const double wobble = 0.1 + 0.3 * unit(rng);
  std::vector<double> phases(40);
  for (auto& p : phases) p = 2.0 * std::numbers::pi * unit(rng);
  auto floor = white_noise(n, rng);
  FirstOrderSection::butterworth_lowpass(2500.0, fs).apply_in_place(floor);
  std::vector<double> out(n);
  double phase = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double f = f0 * (1.0 + 0.02 * std::sin(2.0 * std::numbers::pi * wobble * t / fs));
    phase += 2.0 * std::numbers::pi * f / fs;
    double y = 0.0;
    for (std::size_t h = 1; h <= phases.size(); ++h) y += std::sin(h * phase + phases[h - 1]) / std::sqrt(double(h));
    out[t] = y + 0.6 * floor[t];
  }
  return out;
}

}  // namespace detail

// Noise of exactly n samples: a built-in generator, or a WAV file read at
// a seeded offset and looped if shorter.
inline AudioSignal make_noise(const std::string& name, std::size_t n, double sample_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  AudioSignal out;
  out.sample_rate = sample_rate;
  if (name == "white") {
    out.samples = detail::white_noise(n, rng);
  } else if (name == "babble") {
    out.samples = detail::babble(n, sample_rate, rng);
  } else if (name == "volvo") {
    out.samples = detail::volvo(n, sample_rate, rng);
  } else if (name == "destroyerengine") {
    out.samples = detail::destroyer_engine(n, sample_rate, rng);
  } else {
    AudioSignal file = read_wav(name);
    if (file.sample_rate != sample_rate) file = resample(file, sample_rate);
    if (file.empty()) throw InvalidInput("noise file \"" + name + "\" is empty");
    std::uniform_int_distribution<std::size_t> start(0, file.size() - 1);
    std::size_t pos = start(rng);
    out.samples.resize(n);
    for (auto& v : out.samples) {
      v = file.samples[pos];
      pos = (pos + 1) % file.size();
    }
  }
  return out;
}

struct MixResult {
  AudioSignal signal;
  double noise_scale = 0.0;  // applied to the noise before addition
  double gain = 1.0;         // joint normalization applied to the sum
  std::size_t offset = 0;    // start position in the noise
};

// Adds noise at the requested whole-utterance SNR. Noise shorter than the
// speech is looped from a seeded random offset; longer noise is cut at one.
inline MixResult mix_noise(const AudioSignal& speech, const AudioSignal& noise, double snr_db, std::uint64_t seed = 0) {
  validate(speech);
  MixResult out;
  out.signal = speech;
  if (snr_db == kCleanSnr) return out;
  if (!std::isfinite(snr_db)) throw InvalidInput("mix_noise: SNR must be finite or the clean sentinel");
  if (noise.empty()) throw InvalidInput("mix_noise: empty noise");
  const AudioSignal n = noise.sample_rate == speech.sample_rate ? noise : resample(noise, speech.sample_rate);
  const double ps = mean_power(speech.samples);
  if (!(ps > 0.0)) throw InvalidInput("mix_noise: speech has zero power");
  std::mt19937_64 rng(seed);
  const std::size_t len = speech.size();
  const std::size_t span = n.size() >= len ? n.size() - len : n.size() - 1;
  out.offset = std::uniform_int_distribution<std::size_t>(0, span)(rng);
  std::vector<double> seg(len);
  for (std::size_t t = 0; t < len; ++t) seg[t] = n.samples[(out.offset + t) % n.size()];
  const double pn = mean_power(seg);
  if (!(pn > 0.0)) throw InvalidInput("mix_noise: noise has zero power");
  out.noise_scale = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  double peak = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    out.signal.samples[t] += out.noise_scale * seg[t];
    peak = std::max(peak, std::abs(out.signal.samples[t]));
  }
  if (peak > 1.0) {
    out.gain = 1.0 / peak;
    for (auto& v : out.signal.samples) v *= out.gain;
  }
  return out;
}

inline std::string snr_label(double snr_db) {
  if (snr_db == kCleanSnr) return "clean";
  std::string s = std::to_string(snr_db);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s;
}

inline double parse_snr(const std::string& text) {
  if (text == "clean" || text == "inf") return kCleanSnr;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("cannot parse SNR \"" + text + "\" (expected a number or \"clean\")");
}

}  // namespace sparsehear
