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
#include <vector>

#include "sparsehear/core/binary_io.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/frontend/audio.hpp"
#include "sparsehear/frontend/filters.hpp"
#include "sparsehear/frontend/gammatone.hpp"

namespace sparsehear {

// Compressed envelope energy: channels x frames, non-negative.
struct Cochleogram {
  Matrix values;
  double frame_rate = 1000.0;
  std::vector<double> center_freqs;

  Eigen::Index channels() const { return values.rows(); }
  Eigen::Index frames() const { return values.cols(); }
};

struct EnvelopeConfig {
  double lowpass_hz = 40.0;
  double frame_rate = 1000.0;

  bool operator==(const EnvelopeConfig&) const = default;
};

struct CochleogramConfig {
  PreEmphasis pre_emphasis = PreEmphasis::midband();
  GammatoneConfig gammatone;
  EnvelopeConfig envelope;

  bool operator==(const CochleogramConfig&) const = default;
};

// Half-wave rectification, cube-root compression, first-order 40 Hz
// Butterworth smoothing, then decimation to the frame rate.
inline Cochleogram envelope_compress(const FilterbankOutput& bank, const EnvelopeConfig& cfg = {}) {
  const double ratio = bank.sample_rate / cfg.frame_rate;
  const auto step = static_cast<Eigen::Index>(std::lround(ratio));
  if (step < 1 || std::abs(ratio - static_cast<double>(step)) > 1e-9) {
    throw ConfigError("envelope_compress: sample rate " + std::to_string(bank.sample_rate) +
                      " is not an integer multiple of frame rate " + std::to_string(cfg.frame_rate));
  }
  const auto n = bank.signals.cols();
  const auto frames = static_cast<Eigen::Index>(
      std::floor(static_cast<double>(n) * cfg.frame_rate / bank.sample_rate + 1e-9));
  Cochleogram out;
  out.values = Matrix::Zero(bank.signals.rows(), frames);
  out.frame_rate = cfg.frame_rate;
  out.center_freqs = bank.center_freqs;
  const auto lp = FirstOrderSection::butterworth_lowpass(cfg.lowpass_hz, bank.sample_rate);
  for (Eigen::Index c = 0; c < bank.signals.rows(); ++c) {
    double x1 = 0.0, y1 = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double x = std::cbrt(std::max(bank.signals(c, t), 0.0));
      const double y = lp.b0 * x + lp.b1 * x1 - lp.a1 * y1;
      x1 = x;
      y1 = y;
      if (t % step == 0 && t / step < frames) out.values(c, t / step) = std::max(y, 0.0);
    }
  }
  return out;
}

inline Cochleogram compute_cochleogram(const AudioSignal& input, const CochleogramConfig& cfg = {}) {
  validate(input);
  if (input.empty()) throw InvalidInput("cochleogram: empty signal");
  const AudioSignal signal = pre_emphasize(to_default_rate(input), cfg.pre_emphasis);
  return envelope_compress(gammatone_filterbank(signal, cfg.gammatone), cfg.envelope);
}

inline constexpr std::uint32_t kCochleogramVersion = 1;

inline void write_cochleogram(std::ostream& out, const Cochleogram& c) {
  io::write_magic(out, "CGRM");
  io::write_u32(out, kCochleogramVersion);
  io::write_u32(out, static_cast<std::uint32_t>(c.channels()));
  io::write_u32(out, static_cast<std::uint32_t>(c.frames()));
  io::write_f32(out, static_cast<float>(c.frame_rate));
  for (Eigen::Index r = 0; r < c.channels(); ++r) {
    for (Eigen::Index t = 0; t < c.frames(); ++t) io::write_f32(out, static_cast<float>(c.values(r, t)));
  }
}

inline Cochleogram read_cochleogram(std::istream& in) {
  io::expect_magic(in, "CGRM");
  const auto version = io::read_u32(in);
  if (version != kCochleogramVersion) throw FormatError("CGRM: unsupported version " + std::to_string(version));
  const auto channels = io::read_u32(in);
  const auto frames = io::read_u32(in);
  Cochleogram c;
  c.frame_rate = io::read_f32(in);
  c.values.resize(channels, frames);
  for (std::uint32_t r = 0; r < channels; ++r) {
    for (std::uint32_t t = 0; t < frames; ++t) c.values(r, t) = io::read_f32(in);
  }
  return c;
}

}  // namespace sparsehear
