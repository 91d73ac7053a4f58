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

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "sparsehear/frontend/cochleogram.hpp"

namespace sparsehear {
namespace {

constexpr double kPi = std::numbers::pi;

AudioSignal white_noise(std::size_t n, std::uint64_t seed, double fs = 16000.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.1);
  AudioSignal s{std::vector<double>(n), fs};
  for (auto& v : s.samples) v = dist(rng);
  return s;
}

AudioSignal tone(double hz, double seconds, double amp = 0.5, double fs = 16000.0) {
  AudioSignal s{std::vector<double>(static_cast<std::size_t>(seconds * fs)), fs};
  for (std::size_t t = 0; t < s.size(); ++t) s.samples[t] = amp * std::sin(2 * kPi * hz * t / fs);
  return s;
}

// Oracle: band energy from a plain FFT of the whole signal.
double band_energy(const std::vector<double>& x, double fs, double lo, double hi) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, x);
  double e = 0.0;
  for (std::size_t k = 0; k <= x.size() / 2; ++k) {
    const double f = k * fs / x.size();
    if (f >= lo && f < hi) e += std::norm(spec[k]);
  }
  return e;
}

TEST(PreEmphasis, ZeroSignalStaysZero) {
  AudioSignal zero{std::vector<double>(512, 0.0), 16000};
  for (const auto& mode : {PreEmphasis::midband(), PreEmphasis::first_order(0.97)}) {
    const auto out = pre_emphasize(zero, mode);
    ASSERT_EQ(out.size(), zero.size());
    for (double v : out.samples) EXPECT_EQ(v, 0.0);
  }
}

TEST(PreEmphasis, FirstOrderOnConstant) {
  AudioSignal ones{std::vector<double>(10, 1.0), 16000};
  const auto out = pre_emphasize(ones, PreEmphasis::first_order(0.97));
  EXPECT_DOUBLE_EQ(out.samples[0], 1.0);
  for (std::size_t t = 1; t < out.size(); ++t) EXPECT_NEAR(out.samples[t], 0.03, 1e-12);
  EXPECT_EQ(out.sample_rate, 16000);
}

TEST(PreEmphasis, MidbandBoostsMidFrequencies) {
  const auto noise = white_noise(1 << 15, 7);
  const auto out = pre_emphasize(noise, PreEmphasis::midband());
  const double before = band_energy(noise.samples, 16000, 1000, 4000) / band_energy(noise.samples, 16000, 0, 200);
  const double after = band_energy(out.samples, 16000, 1000, 4000) / band_energy(out.samples, 16000, 0, 200);
  EXPECT_GT(after, before);
}

TEST(PreEmphasis, EmptySignalRejected) {
  EXPECT_THROW(pre_emphasize(AudioSignal{}, PreEmphasis::midband()), InvalidInput);
}

TEST(Gammatone, MelSpacedCentersOverFullRange) {
  GammatoneBank bank(GammatoneConfig{}, 16000);
  const auto fc = bank.center_freqs();
  ASSERT_EQ(fc.size(), 64u);
  const double step = hz_to_mel(fc[1]) - hz_to_mel(fc[0]);
  for (std::size_t k = 1; k < fc.size(); ++k) {
    EXPECT_GT(fc[k], fc[k - 1]);
    EXPECT_NEAR(hz_to_mel(fc[k]) - hz_to_mel(fc[k - 1]), step, 1e-9);
  }
  EXPECT_GE(fc.front(), 0.0);
  EXPECT_LE(fc.back(), 8000.0);
}

TEST(Gammatone, InvalidRangeIsConfigError) {
  GammatoneConfig cfg;
  cfg.f_lo = 5000;
  cfg.f_hi = 4000;
  EXPECT_THROW(GammatoneBank(cfg, 16000), ConfigError);
  cfg.f_lo = 0;
  cfg.f_hi = 9000;
  EXPECT_THROW(GammatoneBank(cfg, 16000), ConfigError);
  cfg.f_hi = 8000;
  cfg.n_channels = 1;
  EXPECT_THROW(GammatoneBank(cfg, 16000), ConfigError);
}

std::vector<Eigen::Index> impulse_envelope_peaks() {
  AudioSignal impulse{std::vector<double>(4000, 0.0), 16000};
  impulse.samples[100] = 1.0;
  const auto out = gammatone_filterbank(impulse, GammatoneConfig{}, /*with_envelopes=*/true);
  std::vector<Eigen::Index> peaks;
  for (Eigen::Index c = 0; c < out.envelopes.rows(); ++c) {
    Eigen::Index arg = 0;
    out.envelopes.row(c).maxCoeff(&arg);
    peaks.push_back(arg);
  }
  return peaks;
}

TEST(Gammatone, ImpulseEnvelopesAligned) {
  const auto peaks = impulse_envelope_peaks();
  const auto [lo, hi] = std::minmax_element(peaks.begin(), peaks.end());
  EXPECT_LE(*hi - *lo, 16) << "peaks span " << *lo << ".." << *hi;
  double mean = 0.0, var = 0.0;
  for (auto p : peaks) mean += p;
  mean /= peaks.size();
  for (auto p : peaks) var += (p - mean) * (p - mean);
  EXPECT_LT(std::sqrt(var / peaks.size()) / 16000.0, 1e-3);
}

TEST(Gammatone, ToneAtCenterPeaksInItsChannel) {
  GammatoneBank bank(GammatoneConfig{}, 16000);
  const auto fc = bank.center_freqs();
  for (std::size_t k : {4u, 10u, 20u, 32u, 45u, 58u, 63u}) {
    const auto out = bank.filter(tone(fc[k], 0.5));
    Eigen::Index best = 0;
    out.signals.rightCols(4000).rowwise().squaredNorm().maxCoeff(&best);
    EXPECT_EQ(static_cast<std::size_t>(best), k) << "tone at " << fc[k] << " Hz";
  }
}

TEST(Envelope, NegativeInputGivesZero) {
  FilterbankOutput bank;
  bank.signals = RowMajorMatrix::Constant(2, 1600, -0.3);
  bank.center_freqs = {100, 200};
  const auto c = envelope_compress(bank);
  EXPECT_EQ(c.frames(), 100);
  EXPECT_EQ(c.values.maxCoeff(), 0.0);
}

TEST(Envelope, ConstantSettlesToCubeRoot) {
  FilterbankOutput bank;
  bank.signals = RowMajorMatrix::Constant(1, 16000, 0.2);
  bank.center_freqs = {100};
  const auto c = envelope_compress(bank);
  EXPECT_NEAR(c.values(0, c.frames() - 1), std::cbrt(0.2), 0.01 * std::cbrt(0.2));
}

// Amplitude of the fm component of a 1 kHz-sampled sequence (lock-in).
double modulation_amplitude(const Matrix& row, double fm, Eigen::Index skip) {
  std::complex<double> acc{};
  Eigen::Index n = 0;
  for (Eigen::Index t = skip; t < row.cols(); ++t, ++n) {
    acc += row(0, t) * std::polar(1.0, -2 * kPi * fm * t / 1000.0);
  }
  return 2.0 * std::abs(acc) / n;
}

TEST(Envelope, ModulationTransferFollowsLowpass) {
  auto am = [](double fm) {
    FilterbankOutput bank;
    bank.signals = RowMajorMatrix(1, 16000 * 2);
    for (Eigen::Index t = 0; t < bank.signals.cols(); ++t) {
      const double time = t / 16000.0;
      bank.signals(0, t) = (1.0 + 0.2 * std::cos(2 * kPi * fm * time)) * std::sin(2 * kPi * 1000 * time);
    }
    bank.center_freqs = {1000};
    return modulation_amplitude(envelope_compress(bank).values, fm, 200);
  };
  const double measured = am(100) / am(10);
  const double expected = butterworth_lowpass_gain(100, 40, 16000) / butterworth_lowpass_gain(10, 40, 16000);
  EXPECT_NEAR(measured, expected, 0.1 * expected);
}

TEST(Cochleogram, NonNegativeAndFrameCount) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t n = 4000 + 977 * seed;
    const auto c = compute_cochleogram(white_noise(n, seed));
    EXPECT_GE(c.values.minCoeff(), 0.0);
    EXPECT_NEAR(c.frames(), std::floor(n / 16000.0 * 1000.0), 1.0);
    EXPECT_EQ(c.channels(), 64);
  }
}

TEST(Cochleogram, ScalingInputNeverDecreasesValues) {
  const auto x = white_noise(6000, 11);
  auto y = x;
  for (auto& v : y.samples) v *= 1.7;
  const auto cx = compute_cochleogram(x), cy = compute_cochleogram(y);
  EXPECT_TRUE(((cy.values - cx.values).array() >= -1e-12).all());
}

TEST(Cochleogram, ResamplesOtherRates) {
  const auto c = compute_cochleogram(tone(440, 0.25, 0.5, 8000));
  EXPECT_NEAR(c.frames(), 250, 1);
}

TEST(Cochleogram, BinaryRoundTrip) {
  const auto c = compute_cochleogram(white_noise(3200, 3));
  std::stringstream buf;
  write_cochleogram(buf, c);
  const auto back = read_cochleogram(buf);
  ASSERT_EQ(back.channels(), c.channels());
  ASSERT_EQ(back.frames(), c.frames());
  EXPECT_LT((back.values - c.values).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(back.frame_rate, 1000.0);
}

TEST(Wav, RoundTripThroughFile) {
  const auto x = tone(300, 0.1, 0.25);
  const std::string path = ::testing::TempDir() + "/rt.wav";
  write_wav(path, x);
  const auto y = read_wav(path);
  ASSERT_EQ(y.size(), x.size());
  EXPECT_EQ(y.sample_rate, 16000);
  for (std::size_t t = 0; t < x.size(); ++t) EXPECT_NEAR(y.samples[t], x.samples[t], 1.0 / 16000);
}

}  // namespace
}  // namespace sparsehear
