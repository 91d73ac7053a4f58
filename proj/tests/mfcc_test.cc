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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "sparsehear/mfcc/mfcc.hpp"

namespace sparsehear {
namespace {

AudioSignal tone(double hz, double seconds, double amp = 0.3) {
  AudioSignal s;
  s.samples.resize(static_cast<std::size_t>(seconds * 16000));
  for (std::size_t t = 0; t < s.size(); ++t) s.samples[t] = amp * std::sin(2.0 * std::numbers::pi * hz * t / 16000.0);
  return s;
}

AudioSignal noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  AudioSignal s;
  s.samples.resize(n);
  for (auto& x : s.samples) x = g(rng);
  return s;
}

TEST(Mfcc, ThirtyNineDimensionsAtHundredHertz) {
  const auto seq = mfcc(noise(16000, 1));
  EXPECT_EQ(seq.dim(), 39);
  EXPECT_DOUBLE_EQ(seq.frame_rate, 100.0);
  EXPECT_EQ(seq.size(), (16000u - 400u) / 160u + 1u);
  for (const auto& f : seq.frames) EXPECT_TRUE(f.allFinite());
}

TEST(Mfcc, StationaryToneHasZeroDeltas) {
  const auto seq = mfcc(tone(1000.0, 1.0));
  for (std::size_t t = 10; t + 10 < seq.size(); ++t) {
    EXPECT_LT(seq.frames[t].tail(26).cwiseAbs().maxCoeff(), 1e-3) << "frame " << t;
  }
}

TEST(Mfcc, CepstralMeanIsZero) {
  const auto seq = mfcc(noise(12000, 2));
  Vector mean = Vector::Zero(12);
  for (const auto& f : seq.frames) mean += f.segment(1, 12);
  mean /= static_cast<double>(seq.size());
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Mfcc, OneHopShiftMovesFramesByOne) {
  MfccConfig cfg;
  cfg.cepstral_mean_norm = false;
  const AudioSignal base = noise(16000, 3);
  AudioSignal shifted = noise(160, 4);
  shifted.samples.insert(shifted.samples.end(), base.samples.begin(), base.samples.end());
  const auto a = mfcc(base, cfg), b = mfcc(shifted, cfg);
  for (std::size_t t = 5; t + 5 < a.size(); ++t) {
    EXPECT_LT((a.frames[t] - b.frames[t + 1]).cwiseAbs().maxCoeff(), 1e-6) << "frame " << t;
  }
}

TEST(Mfcc, GainMovesEnergyOnly) {
  AudioSignal quiet = noise(8000, 5), loud = quiet;
  for (auto& x : loud.samples) x *= 3.0;
  const auto a = mfcc(quiet), b = mfcc(loud);
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_GT(b.frames[t](0), a.frames[t](0));
    EXPECT_LT((a.frames[t].segment(1, 12) - b.frames[t].segment(1, 12)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Mfcc, TooShortSignalRejected) { EXPECT_THROW(mfcc(noise(399, 6)), InvalidInput); }

TEST(Mfcc, FilterbankTrianglesPartitionUnity) {
  const Matrix fb = mel_filterbank(26, 512, 16000.0, 0.0, 0.0);
  const double first_centre = 700.0 * std::expm1(htk_mel(8000.0) / 27.0 / 1127.0);
  const double last_centre = 700.0 * std::expm1(htk_mel(8000.0) * 26.0 / 27.0 / 1127.0);
  for (int b = 0; b < fb.cols(); ++b) {
    const double hz = b * 16000.0 / 512.0;
    if (hz >= first_centre && hz <= last_centre) EXPECT_NEAR(fb.col(b).sum(), 1.0, 1e-12) << hz;
  }
  EXPECT_LE(fb.maxCoeff(), 1.0);
}

// One frame recomputed with a direct DFT and explicit sums.
TEST(Mfcc, MatchesDirectComputationOnOneFrame) {
  MfccConfig cfg;
  cfg.cepstral_mean_norm = false;
  const AudioSignal s = noise(1200, 7);
  const auto seq = mfcc(s, cfg);
  const std::size_t start = 2 * 160;
  std::vector<double> frame(512, 0.0);
  double energy = 0.0;
  for (int n = 0; n < 400; ++n) {
    const double x = s.samples[start + n];
    const double prev = start + n > 0 ? s.samples[start + n - 1] : 0.0;
    energy += x * x;
    frame[n] = (x - 0.97 * prev) * (0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / 399.0));
  }
  const Matrix fb = mel_filterbank(26, 512, 16000.0, 0.0, 0.0);
  Vector logmel = Vector::Zero(26);
  std::vector<double> mag(257);
  for (int k = 0; k <= 256; ++k) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < 512; ++n) acc += frame[n] * std::polar(1.0, -2.0 * std::numbers::pi * k * n / 512.0);
    mag[k] = std::abs(acc);
  }
  for (int j = 0; j < 26; ++j) {
    double e = 0.0;
    for (int k = 0; k <= 256; ++k) e += fb(j, k) * mag[k];
    logmel(j) = std::log(e);
  }
  EXPECT_NEAR(seq.frames[2](0), std::log(energy), 1e-9);
  for (int i = 1; i <= 12; ++i) {
    double c = 0.0;
    for (int j = 0; j < 26; ++j) c += logmel(j) * std::cos(std::numbers::pi * i * (j + 0.5) / 26.0);
    c *= std::sqrt(2.0 / 26.0) * (1.0 + 11.0 * std::sin(std::numbers::pi * i / 22.0));
    EXPECT_NEAR(seq.frames[2](i), c, 1e-9) << "c" << i;
  }
}

TEST(Mfcc, FileRoundTrip) {
  const auto seq = mfcc(noise(4000, 8));
  std::stringstream buf;
  write_mfcc(buf, seq);
  const auto back = read_mfcc(buf);
  ASSERT_EQ(back.size(), seq.size());
  EXPECT_EQ(back.dim(), 39);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    EXPECT_LT((back.frames[t] - seq.frames[t]).cwiseAbs().maxCoeff(), 1e-4 * (1.0 + seq.frames[t].cwiseAbs().maxCoeff()));
  }
}

}  // namespace
}  // namespace sparsehear
