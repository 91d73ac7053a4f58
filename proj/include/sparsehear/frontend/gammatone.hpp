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

// Phase-aligned gammatone filterbank. Each channel is a cascade of identical
// complex one-pole sections (an all-pole gammatone); the real part of the
// complex output is the channel signal and its modulus is the Hilbert
// envelope.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/frontend/audio.hpp"

namespace sparsehear {

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Glasberg & Moore equivalent rectangular bandwidth.
inline double erb_hz(double hz) { return 24.7 * (4.37 * hz / 1000.0 + 1.0); }

struct GammatoneConfig {
  int n_channels = 64;
  double f_lo = 0.0;
  double f_hi = 8000.0;
  int order = 4;
  double bandwidth_factor = 1.5;  // multiple of 1.019 ERB
  bool align_phase = true;

  bool operator==(const GammatoneConfig&) const = default;
};

// Center frequencies at the midpoints of n equal Mel bands spanning [f_lo, f_hi].
inline std::vector<double> mel_center_frequencies(int n, double f_lo, double f_hi) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double m_lo = hz_to_mel(f_lo), m_hi = hz_to_mel(f_hi);
  for (int k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = mel_to_hz(m_lo + (k + 0.5) * (m_hi - m_lo) / n);
  }
  return out;
}

struct GammatoneChannel {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
  std::complex<double> pole;
  double stage_gain = 1.0;
  int envelope_peak = 0;  // samples from impulse to envelope maximum
};

struct FilterbankOutput {
  RowMajorMatrix signals;    // channels x samples, real part
  RowMajorMatrix envelopes;  // channels x samples, empty unless requested
  std::vector<double> center_freqs;
  double sample_rate = kDefaultSampleRate;
};

class GammatoneBank {
 public:
  GammatoneBank(const GammatoneConfig& cfg, double sample_rate) : cfg_(cfg), sample_rate_(sample_rate) {
    if (cfg.n_channels < 2) throw ConfigError("gammatone: need at least 2 channels");
    if (cfg.order < 1) throw ConfigError("gammatone: order must be >= 1");
    if (!(cfg.f_lo >= 0.0) || !(cfg.f_lo < cfg.f_hi) || cfg.f_hi > sample_rate / 2.0) {
      throw ConfigError("gammatone: need 0 <= f_lo < f_hi <= sample_rate/2, got [" +
                        std::to_string(cfg.f_lo) + ", " + std::to_string(cfg.f_hi) + "]");
    }
    const auto centers = mel_center_frequencies(cfg.n_channels, cfg.f_lo, cfg.f_hi);
    for (double fc : centers) {
      GammatoneChannel ch;
      ch.center_hz = fc;
      ch.bandwidth_hz = 1.019 * erb_hz(fc) * cfg.bandwidth_factor;
      const double r = std::exp(-2.0 * std::numbers::pi * ch.bandwidth_hz / sample_rate);
      ch.pole = std::polar(r, 2.0 * std::numbers::pi * fc / sample_rate);
      ch.stage_gain = 1.0 - r;  // unit gain at fc for each stage
      ch.envelope_peak = envelope_peak_index(r, cfg.order);
      channels_.push_back(ch);
    }
    max_peak_ = 0;
    for (const auto& ch : channels_) max_peak_ = std::max(max_peak_, ch.envelope_peak);
  }

  const std::vector<GammatoneChannel>& channels() const { return channels_; }
  std::vector<double> center_freqs() const {
    std::vector<double> out;
    for (const auto& ch : channels_) out.push_back(ch.center_hz);
    return out;
  }
  // Samples each channel is delayed by so that envelope peaks coincide.
  int alignment_delay(std::size_t channel) const {
    return cfg_.align_phase ? max_peak_ - channels_[channel].envelope_peak : 0;
  }
  double sample_rate() const { return sample_rate_; }

  FilterbankOutput filter(const AudioSignal& signal, bool with_envelopes = false) const {
    if (signal.sample_rate != sample_rate_) {
      throw ConfigError("gammatone: bank designed for " + std::to_string(sample_rate_) +
                        " Hz, signal is " + std::to_string(signal.sample_rate) + " Hz");
    }
    const auto n = static_cast<Eigen::Index>(signal.size());
    const auto n_ch = static_cast<Eigen::Index>(channels_.size());
    FilterbankOutput out;
    out.signals = RowMajorMatrix::Zero(n_ch, n);
    if (with_envelopes) out.envelopes = RowMajorMatrix::Zero(n_ch, n);
    out.center_freqs = center_freqs();
    out.sample_rate = sample_rate_;

    std::vector<std::complex<double>> state(static_cast<std::size_t>(cfg_.order));
    for (Eigen::Index c = 0; c < n_ch; ++c) {
      const auto& ch = channels_[static_cast<std::size_t>(c)];
      const long shift = alignment_delay(static_cast<std::size_t>(c));
      std::fill(state.begin(), state.end(), std::complex<double>{});
      for (Eigen::Index t = 0; t + shift < n; ++t) {
        std::complex<double> v(signal.samples[static_cast<std::size_t>(t)], 0.0);
        for (auto& s : state) {
          s = ch.stage_gain * v + ch.pole * s;
          v = s;
        }
        out.signals(c, t + shift) = 2.0 * v.real();
        if (with_envelopes) out.envelopes(c, t + shift) = 2.0 * std::abs(v);
      }
    }
    return out;
  }

 private:
  // |h[n]| of an order-k cascade is C(n+k-1, k-1) r^n; return its argmax.
  static int envelope_peak_index(double r, int order) {
    int best = 0;
    double best_log = 0.0;
    double log_mag = 0.0;  // log C(n+k-1,k-1) + n log r, built incrementally
    for (int n = 1; n < 1000000; ++n) {
      log_mag += std::log(static_cast<double>(n + order - 1) / n) + std::log(r);
      if (log_mag > best_log) {
        best_log = log_mag;
        best = n;
      } else if (n > best + 8) {
        break;
      }
    }
    return best;
  }

  GammatoneConfig cfg_;
  double sample_rate_;
  std::vector<GammatoneChannel> channels_;
  int max_peak_ = 0;
};

inline FilterbankOutput gammatone_filterbank(const AudioSignal& signal, const GammatoneConfig& cfg,
                                             bool with_envelopes = false) {
  if (signal.empty()) throw InvalidInput("gammatone_filterbank: empty signal");
  return GammatoneBank(cfg, signal.sample_rate).filter(signal, with_envelopes);
}

}  // namespace sparsehear
