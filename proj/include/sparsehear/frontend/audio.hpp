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
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "sparsehear/core/binary_io.hpp"
#include "sparsehear/core/error.hpp"

namespace sparsehear {

inline constexpr double kDefaultSampleRate = 16000.0;

// Mono audio, amplitudes nominally in [-1, 1].
struct AudioSignal {
  std::vector<double> samples;
  double sample_rate = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

inline void validate(const AudioSignal& signal) {
  if (!(signal.sample_rate > 0.0) || !std::isfinite(signal.sample_rate)) {
    throw InvalidInput("sample rate must be positive, got " + std::to_string(signal.sample_rate));
  }
  for (double v : signal.samples) {
    if (!std::isfinite(v)) throw InvalidInput("audio contains non-finite samples");
  }
}

inline double mean_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

// Band-limited resampling with a Hann-windowed sinc kernel.
inline AudioSignal resample(const AudioSignal& in, double target_rate, int half_taps = 16) {
  validate(in);
  if (!(target_rate > 0.0)) throw ConfigError("target sample rate must be positive");
  if (in.sample_rate == target_rate || in.empty()) {
    return AudioSignal{in.samples, target_rate};
  }
  const double ratio = target_rate / in.sample_rate;
  const double cutoff = std::min(1.0, ratio);  // relative to the input Nyquist
  const auto out_len = static_cast<std::size_t>(std::floor(static_cast<double>(in.size()) * ratio));
  const double support = half_taps / cutoff;
  AudioSignal out{std::vector<double>(out_len, 0.0), target_rate};
  const auto n_in = static_cast<long>(in.size());
  for (std::size_t k = 0; k < out_len; ++k) {
    const double pos = static_cast<double>(k) / ratio;
    const long first = static_cast<long>(std::ceil(pos - support));
    const long last = static_cast<long>(std::floor(pos + support));
    double acc = 0.0;
    for (long n = std::max(first, 0L); n <= std::min(last, n_in - 1); ++n) {
      const double d = pos - static_cast<double>(n);
      const double x = d * cutoff;
      const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * d / support);
      acc += in.samples[static_cast<std::size_t>(n)] * cutoff * sinc * w;
    }
    out.samples[k] = acc;
  }
  return out;
}

inline AudioSignal to_default_rate(const AudioSignal& in) {
  return in.sample_rate == kDefaultSampleRate ? in : resample(in, kDefaultSampleRate);
}

// RIFF/WAVE, 16-bit signed PCM. Multi-channel input is downmixed by averaging.
inline AudioSignal read_wav(const std::string& path) {
  auto in = io::open_in(path);
  io::expect_magic(in, "RIFF");
  io::read_u32(in);
  io::expect_magic(in, "WAVE");
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (true) {
    char id[4];
    in.read(id, 4);
    if (!in) throw FormatError(path + ": no data chunk");
    const std::uint32_t size = io::read_u32(in);
    const std::string tag(id, 4);
    if (tag == "fmt ") {
      format = io::read_pod<std::uint16_t>(in);
      channels = io::read_pod<std::uint16_t>(in);
      rate = io::read_u32(in);
      io::read_u32(in);
      io::read_pod<std::uint16_t>(in);
      bits = io::read_pod<std::uint16_t>(in);
      in.seekg(static_cast<std::streamoff>(size) - 16 + (size & 1u), std::ios::cur);
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) throw FormatError(path + ": data chunk before fmt chunk");
      if (format != 1 || bits != 16) {
        throw FormatError(path + ": only 16-bit PCM is supported (format " + std::to_string(format) +
                          ", " + std::to_string(bits) + " bits)");
      }
      if (channels == 0 || rate == 0) throw FormatError(path + ": invalid fmt chunk");
      const std::size_t frames = size / (2u * channels);
      std::vector<std::int16_t> raw(frames * channels);
      in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 2));
      const auto got = static_cast<std::size_t>(in.gcount()) / (2u * channels);
      AudioSignal signal{std::vector<double>(got), static_cast<double>(rate)};
      for (std::size_t f = 0; f < got; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) acc += raw[f * channels + c];
        signal.samples[f] = acc / (32768.0 * channels);
      }
      return signal;
    } else {
      in.seekg(static_cast<std::streamoff>(size + (size & 1u)), std::ios::cur);
    }
  }
}

inline void write_wav(const std::string& path, const AudioSignal& signal) {
  auto out = io::open_out(path);
  const auto rate = static_cast<std::uint32_t>(std::lround(signal.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(signal.size() * 2);
  io::write_magic(out, "RIFF");
  io::write_u32(out, 36 + data_bytes);
  io::write_magic(out, "WAVEfmt ");
  io::write_u32(out, 16);
  io::write_pod<std::uint16_t>(out, 1);
  io::write_pod<std::uint16_t>(out, 1);
  io::write_u32(out, rate);
  io::write_u32(out, rate * 2);
  io::write_pod<std::uint16_t>(out, 2);
  io::write_pod<std::uint16_t>(out, 16);
  io::write_magic(out, "data");
  io::write_u32(out, data_bytes);
  for (double v : signal.samples) {
    const double scaled = std::clamp(std::round(v * 32767.0), -32768.0, 32767.0);
    io::write_pod<std::int16_t>(out, static_cast<std::int16_t>(scaled));
  }
}

}  // namespace sparsehear
