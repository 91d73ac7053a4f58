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
#include <random>
#include <vector>

namespace sparsehear {

// Two-pole digital resonator with unit gain at DC.
class Resonator {
 public:
  void set(double freq_hz, double bandwidth_hz, double sample_rate) {
    const double r = std::exp(-std::numbers::pi * bandwidth_hz / sample_rate);
    b_ = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq_hz / sample_rate);
    c_ = -r * r;
    a_ = 1.0 - b_ - c_;
  }
  double step(double x) {
    const double y = a_ * x + b_ * y1_ + c_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a_ = 1.0, b_ = 0.0, c_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

inline void scale_to_rms(std::vector<double>& x, double rms) {
  double p = 0.0;
  for (double v : x) p += v * v;
  if (x.empty() || p <= 0.0) return;
  const double g = rms / std::sqrt(p / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

// Raised-cosine onset and offset ramps.
inline void apply_ramps(std::vector<double>& x, std::size_t ramp) {
  ramp = std::min(ramp, x.size() / 2);
  for (std::size_t t = 0; t < ramp; ++t) {
    const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * (t + 0.5) / ramp);
    x[t] *= w;
    x[x.size() - 1 - t] *= w;
  }
}

// Voiced source through a formant cascade. Formants move linearly from
// `from` to `to` over the first `transition` fraction of the segment.
struct VoicedSegment {
  double seconds = 0.2;
  double f0_start = 120.0, f0_end = 110.0;
  std::vector<double> from, to, bandwidths;  // formant frequencies and bandwidths
  double transition = 0.4;
};

inline std::vector<double> synthesize_voiced(const VoicedSegment& seg, double fs, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(seg.seconds * fs);
  std::vector<double> out(n, 0.0);
  std::vector<Resonator> res(seg.to.size());
  std::normal_distribution<double> aspiration(0.0, 0.02);
  double phase = 1.0, tilt = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double u = n > 1 ? static_cast<double>(t) / (n - 1) : 0.0;
    const double f0 = seg.f0_start + (seg.f0_end - seg.f0_start) * u;
    phase += f0 / fs;
    double src = aspiration(rng);
    if (phase >= 1.0) {
      phase -= 1.0;
      src += 1.0;
    }
    tilt = 0.9 * tilt + src;
    const double k = seg.transition > 0.0 ? std::min(1.0, u / seg.transition) : 1.0;
    double y = tilt;
    for (std::size_t f = 0; f < res.size(); ++f) {
      const double from = seg.from.empty() ? seg.to[f] : seg.from[f];
      res[f].set(from + (seg.to[f] - from) * k, seg.bandwidths[f], fs);
      y = res[f].step(y);
    }
    out[t] = y;
  }
  return out;
}

// White noise through a single resonator (frication, bursts).
inline std::vector<double> synthesize_noise_band(double seconds, double centre_hz, double bandwidth_hz, double fs,
                                                 std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(seconds * fs);
  std::vector<double> out(n);
  std::normal_distribution<double> g(0.0, 1.0);
  Resonator r;
  r.set(centre_hz, bandwidth_hz, fs);
  double prev = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double x = g(rng);
    out[t] = r.step(x - prev);  // first difference removes the resonator's DC gain
    prev = x;
  }
  return out;
}

}  // namespace sparsehear
