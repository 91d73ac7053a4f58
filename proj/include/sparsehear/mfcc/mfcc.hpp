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
#include <complex>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sparsehear/core/binary_io.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/frontend/audio.hpp"
#include "sparsehear/frontend/filters.hpp"

namespace sparsehear {

struct MfccConfig {
  double pre_emphasis = 0.97;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int filters = 26;
  int cepstra = 12;  // c1..c12
  int lifter = 22;
  int delta_window = 2;
  bool cepstral_mean_norm = true;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0 means Nyquist

  bool operator==(const MfccConfig&) const = default;
};

// Per frame: [log-energy, c1..c12, deltas, delta-deltas].
struct MfccSequence {
  std::vector<Vector> frames;
  double frame_rate = 100.0;

  std::size_t size() const { return frames.size(); }
  int dim() const { return frames.empty() ? 0 : static_cast<int>(frames.front().size()); }
};

inline double htk_mel(double hz) { return 1127.0 * std::log1p(hz / 700.0); }

// Triangular filters on the magnitude-spectrum bins, equally spaced on the mel scale.
inline Matrix mel_filterbank(int filters, int fft_size, double sample_rate, double low_hz, double high_hz) {
  if (filters < 1) throw ConfigError("mfcc: need at least one filter");
  if (high_hz <= 0.0) high_hz = sample_rate / 2.0;
  if (!(low_hz >= 0.0 && low_hz < high_hz && high_hz <= sample_rate / 2.0)) {
    throw ConfigError("mfcc: invalid filterbank range");
  }
  const int bins = fft_size / 2 + 1;
  const double mlo = htk_mel(low_hz), mhi = htk_mel(high_hz);
  std::vector<double> centres(static_cast<std::size_t>(filters) + 2);
  for (int k = 0; k < filters + 2; ++k) centres[k] = mlo + (mhi - mlo) * k / (filters + 1);
  Matrix fb = Matrix::Zero(filters, bins);
  for (int b = 0; b < bins; ++b) {
    const double m = htk_mel(b * sample_rate / fft_size);
    for (int k = 0; k < filters; ++k) {
      const double lo = centres[k], mid = centres[k + 1], hi = centres[k + 2];
      if (m > lo && m < hi) fb(k, b) = m <= mid ? (m - lo) / (mid - lo) : (hi - m) / (hi - mid);
    }
  }
  return fb;
}

// Regression deltas over +-window frames; edges replicate the end frames.
inline std::vector<Vector> deltas(const std::vector<Vector>& x, int window) {
  const auto n = static_cast<long>(x.size());
  double norm = 0.0;
  for (int k = 1; k <= window; ++k) norm += 2.0 * k * k;
  std::vector<Vector> out;
  out.reserve(x.size());
  for (long t = 0; t < n; ++t) {
    Vector d = Vector::Zero(x[static_cast<std::size_t>(t)].size());
    for (int k = 1; k <= window; ++k) {
      const auto ahead = static_cast<std::size_t>(std::min(t + k, n - 1));
      const auto behind = static_cast<std::size_t>(std::max(t - k, 0L));
      d += k * (x[ahead] - x[behind]);
    }
    out.push_back(d / norm);
  }
  return out;
}

inline MfccSequence mfcc(const AudioSignal& input, const MfccConfig& cfg = {}) {
  validate(input);
  const AudioSignal signal = to_default_rate(input);
  const double fs = signal.sample_rate;
  const int win = static_cast<int>(std::lround(cfg.frame_ms * fs / 1000.0));
  const int hop = static_cast<int>(std::lround(cfg.hop_ms * fs / 1000.0));
  if (win < 2 || hop < 1 || cfg.cepstra < 1 || cfg.cepstra >= cfg.filters || cfg.lifter < 0 || cfg.delta_window < 1) {
    throw ConfigError("mfcc: invalid configuration");
  }
  if (signal.samples.size() < static_cast<std::size_t>(win)) {
    throw InvalidInput("mfcc: signal of " + std::to_string(signal.samples.size()) + " samples is shorter than one " +
                       std::to_string(win) + "-sample frame");
  }
  const auto emphasized = pre_emphasize(signal, PreEmphasis::first_order(cfg.pre_emphasis)).samples;
  int fft_size = 1;
  while (fft_size < win) fft_size *= 2;
  const Matrix fb = mel_filterbank(cfg.filters, fft_size, fs, cfg.low_hz, cfg.high_hz);
  std::vector<double> hamming(static_cast<std::size_t>(win));
  for (int n = 0; n < win; ++n) hamming[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (win - 1));
  Matrix dct(cfg.cepstra, cfg.filters);
  for (int i = 0; i < cfg.cepstra; ++i)
    for (int j = 0; j < cfg.filters; ++j)
      dct(i, j) = std::sqrt(2.0 / cfg.filters) * std::cos(std::numbers::pi * (i + 1) * (j + 0.5) / cfg.filters);
  Vector lifter = Vector::Ones(cfg.cepstra);
  if (cfg.lifter > 0) {
    for (int i = 0; i < cfg.cepstra; ++i)
      lifter(i) = 1.0 + cfg.lifter / 2.0 * std::sin(std::numbers::pi * (i + 1) / cfg.lifter);
  }

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  const std::size_t n_frames = (signal.samples.size() - win) / hop + 1;
  std::vector<Vector> cep, energy;
  std::vector<double> frame(static_cast<std::size_t>(fft_size));
  std::vector<std::complex<double>> spec;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * hop;
    double e = 0.0;
    std::fill(frame.begin(), frame.end(), 0.0);
    for (int n = 0; n < win; ++n) {
      const double raw = signal.samples[start + n];
      e += raw * raw;
      frame[n] = emphasized[start + n] * hamming[n];
    }
    fft.fwd(spec, frame);
    Vector mag(fft_size / 2 + 1);
    for (int b = 0; b <= fft_size / 2; ++b) mag(b) = std::abs(spec[static_cast<std::size_t>(b)]);
    const Vector logmel = (fb * mag).cwiseMax(1e-12).array().log();
    cep.push_back(lifter.cwiseProduct(dct * logmel));
    energy.push_back(Vector::Constant(1, std::log(std::max(e, 1e-12))));
  }
  if (cfg.cepstral_mean_norm) {
    Vector mean = Vector::Zero(cfg.cepstra);
    for (const auto& c : cep) mean += c;
    mean /= static_cast<double>(cep.size());
    for (auto& c : cep) c -= mean;
  }
  std::vector<Vector> statics;
  for (std::size_t f = 0; f < n_frames; ++f) {
    Vector s(cfg.cepstra + 1);
    s << energy[f], cep[f];
    statics.push_back(std::move(s));
  }
  const auto d1 = deltas(statics, cfg.delta_window);
  const auto d2 = deltas(d1, cfg.delta_window);
  MfccSequence out;
  out.frame_rate = fs / hop;
  const auto width = statics.front().size();
  for (std::size_t f = 0; f < n_frames; ++f) {
    Vector v(3 * width);
    v << statics[f], d1[f], d2[f];
    out.frames.push_back(std::move(v));
  }
  return out;
}

// "MFC1", u32 dim, f32 frame_rate, u32 n_frames, row-major f32.
inline void write_mfcc(std::ostream& out, const MfccSequence& seq) {
  io::write_magic(out, "MFC1");
  io::write_u32(out, static_cast<std::uint32_t>(seq.dim()));
  io::write_f32(out, static_cast<float>(seq.frame_rate));
  io::write_u32(out, static_cast<std::uint32_t>(seq.size()));
  for (const auto& f : seq.frames)
    for (Eigen::Index k = 0; k < f.size(); ++k) io::write_f32(out, static_cast<float>(f(k)));
}

inline MfccSequence read_mfcc(std::istream& in) {
  io::expect_magic(in, "MFC1");
  const auto dim = io::read_u32(in);
  MfccSequence seq;
  seq.frame_rate = io::read_f32(in);
  const auto n = io::read_u32(in);
  if (dim == 0 || dim > 4096 || n > (1u << 26)) throw FormatError("MFC1: corrupt header");
  for (std::uint32_t t = 0; t < n; ++t) {
    Vector v(dim);
    for (std::uint32_t k = 0; k < dim; ++k) v(k) = io::read_f32(in);
    seq.frames.push_back(std::move(v));
  }
  return seq;
}

}  // namespace sparsehear
