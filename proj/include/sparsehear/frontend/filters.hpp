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
#include <numbers>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/frontend/audio.hpp"

namespace sparsehear {

// First-order IIR section y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1].
struct FirstOrderSection {
  double b0 = 1.0, b1 = 0.0, a1 = 0.0;

  // Butterworth designs by bilinear transform with frequency prewarping.
  static FirstOrderSection butterworth_lowpass(double cutoff_hz, double sample_rate) {
    const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
    return {k / (1.0 + k), k / (1.0 + k), (k - 1.0) / (k + 1.0)};
  }
  static FirstOrderSection butterworth_highpass(double cutoff_hz, double sample_rate) {
    const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
    return {1.0 / (1.0 + k), -1.0 / (1.0 + k), (k - 1.0) / (k + 1.0)};
  }

  template <typename Seq>
  void apply_in_place(Seq& x) const {
    double x1 = 0.0, y1 = 0.0;
    for (auto& v : x) {
      const double y = b0 * v + b1 * x1 - a1 * y1;
      x1 = v;
      y1 = y;
      v = y;
    }
  }
};

// Analytic magnitude response of the bilinear first-order Butterworth low-pass.
inline double butterworth_lowpass_gain(double freq_hz, double cutoff_hz, double sample_rate) {
  const double ratio = std::tan(std::numbers::pi * freq_hz / sample_rate) /
                       std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  return 1.0 / std::sqrt(1.0 + ratio * ratio);
}

struct PreEmphasis {
  enum class Mode { kMidband, kFirstOrder };
  Mode mode = Mode::kMidband;
  double alpha = 0.97;           // first-order coefficient
  double midband_low_hz = 300;   // high-pass corner of the mid-band emphasis
  double midband_high_hz = 5000; // low-pass corner of the mid-band emphasis

  static PreEmphasis midband() { return {}; }
  static PreEmphasis first_order(double alpha) { return {Mode::kFirstOrder, alpha}; }
  bool operator==(const PreEmphasis&) const = default;
};

inline AudioSignal pre_emphasize(const AudioSignal& signal, const PreEmphasis& cfg) {
  if (signal.empty()) throw InvalidInput("pre_emphasize: empty signal");
  AudioSignal out = signal;
  if (cfg.mode == PreEmphasis::Mode::kFirstOrder) {
    for (std::size_t t = out.size(); t-- > 1;) {
      out.samples[t] = signal.samples[t] - cfg.alpha * signal.samples[t - 1];
    }
    return out;
  }
  if (!(cfg.midband_low_hz > 0.0) || !(cfg.midband_high_hz > cfg.midband_low_hz) ||
      !(cfg.midband_high_hz < signal.sample_rate / 2)) {
    throw ConfigError("pre_emphasize: mid-band corners must satisfy 0 < low < high < Nyquist");
  }
  FirstOrderSection::butterworth_highpass(cfg.midband_low_hz, signal.sample_rate).apply_in_place(out.samples);
  FirstOrderSection::butterworth_lowpass(cfg.midband_high_hz, signal.sample_rate).apply_in_place(out.samples);
  return out;
}

}  // namespace sparsehear
