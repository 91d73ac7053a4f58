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
#include <random>
#include <sstream>

#include "sparsehear/ica/dictionary.hpp"
#include "sparsehear/ica/fastica.hpp"
#include "sparsehear/ica/sparsity.hpp"
#include "sparsehear/ica/train_hierarchy.hpp"
#include "sparsehear/ica/whitening.hpp"
#include "test_support.hpp"

namespace sparsehear {
namespace {

using testing::amari_index;
using testing::independent_sources;
using testing::random_matrix;

Matrix sample_covariance(const Matrix& z) {
  const Matrix c = z.colwise() - z.rowwise().mean();
  return c * c.transpose() / static_cast<double>(z.cols());
}

TEST(Whiten, DiagonalCovarianceBecomesIdentity) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(2, 5000);
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    x(0, t) = 2.0 * normal(rng) + 3.0;
    x(1, t) = normal(rng) - 1.0;
  }
  const auto res = whiten(x);
  const Matrix cov = sample_covariance(res.whitened);
  EXPECT_LT((cov - Matrix::Identity(2, 2)).norm() / std::sqrt(2.0), 1e-6);
  EXPECT_EQ(res.whitening.dropped, 0);
}

TEST(Whiten, WhiteDataGivesNearOrthonormalTransform) {
  std::mt19937_64 rng(2);
  const Matrix x = random_matrix(4, 20000, rng);
  const auto res = whiten(x);
  const Matrix& v = res.whitening.transform;
  EXPECT_LT((v * v.transpose() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Whiten, ConstantDimensionIsDropped) {
  std::mt19937_64 rng(3);
  Matrix x = random_matrix(3, 1000, rng);
  x.row(1).setConstant(0.7);
  const auto res = whiten(x);
  EXPECT_EQ(res.whitening.dropped, 1);
  EXPECT_EQ(res.whitening.out_dim(), 2);
  EXPECT_LT((sample_covariance(res.whitened) - Matrix::Identity(2, 2)).norm(), 1e-6);
}

TEST(Whiten, ReducesToRequestedDimension) {
  std::mt19937_64 rng(4);
  const auto res = whiten(random_matrix(6, 2000, rng), 3);
  EXPECT_EQ(res.whitened.rows(), 3);
  EXPECT_THROW(whiten(random_matrix(6, 20, rng), 7), ConfigError);
  EXPECT_THROW(whiten(Matrix(3, 0)), InvalidInput);
}

TEST(FastIca, SeparatesTwoUniformSources) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-std::sqrt(3.0), std::sqrt(3.0));
  Matrix s(2, 10000);
  for (Eigen::Index t = 0; t < s.cols(); ++t) s(0, t) = uni(rng), s(1, t) = uni(rng);
  const Matrix a = random_matrix(2, 2, rng);
  const auto white = whiten(a * s);
  const auto ica = fast_ica(white.whitened, {2, Contrast::kLogCosh, 400, 1e-5, 9});
  EXPECT_TRUE(ica.converged);
  EXPECT_LT(amari_index(ica.unmixing * white.whitening.transform * a), 0.05);
}

TEST(FastIca, AllContrastsSeparateMixedSources) {
  for (auto c : {Contrast::kLogCosh, Contrast::kExp, Contrast::kKurtosis}) {
    std::mt19937_64 rng(6);
    const Matrix s = independent_sources(3, 20000, rng);
    const Matrix a = random_matrix(3, 3, rng);
    const auto white = whiten(a * s);
    const auto ica = fast_ica(white.whitened, {3, c, 400, 1e-5, 1});
    EXPECT_LT(amari_index(ica.unmixing * white.whitening.transform * a), 0.05) << to_string(c);
  }
}

TEST(FastIca, UnmixingRowsOrthonormal) {
  std::mt19937_64 rng(7);
  const Matrix s = independent_sources(5, 4000, rng);
  const auto white = whiten(random_matrix(8, 5, rng) * s + 0.01 * random_matrix(8, 4000, rng));
  const auto ica = fast_ica(white.whitened, {4, Contrast::kLogCosh, 400, 1e-5, 3});
  EXPECT_LT((ica.unmixing * ica.unmixing.transpose() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FastIca, GaussianDataIsFlagged) {
  std::mt19937_64 rng(8);
  const auto white = whiten(random_matrix(3, 20000, rng));
  const auto ica = fast_ica(white.whitened, {3, Contrast::kLogCosh, 200, 1e-5, 2});
  EXPECT_TRUE(!ica.converged || ica.near_gaussian)
      << "max negentropy " << ica.negentropy.maxCoeff();
}

TEST(FastIca, NonGaussianSourcesAreNotFlagged) {
  std::mt19937_64 rng(8);
  const auto white = whiten(independent_sources(3, 20000, rng));
  const auto ica = fast_ica(white.whitened, {3, Contrast::kLogCosh, 400, 1e-5, 2});
  EXPECT_FALSE(ica.near_gaussian);
}

TEST(FastIca, SingleComponentOnLineIsUnitVector) {
  std::mt19937_64 rng(9);
  const auto white = whiten(independent_sources(1, 500, rng));
  const auto ica = fast_ica(white.whitened, {1, Contrast::kLogCosh, 50, 1e-5, 4});
  ASSERT_EQ(ica.unmixing.size(), 1);
  EXPECT_NEAR(std::abs(ica.unmixing(0, 0)), 1.0, 1e-12);
}

TEST(FastIca, SameSeedIsBitReproducible) {
  std::mt19937_64 rng(10);
  const auto white = whiten(random_matrix(4, 4, rng) * independent_sources(4, 3000, rng));
  const auto a = fast_ica(white.whitened, {4, Contrast::kLogCosh, 400, 1e-5, 77});
  const auto b = fast_ica(white.whitened, {4, Contrast::kLogCosh, 400, 1e-5, 77});
  EXPECT_EQ(a.unmixing, b.unmixing);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(FastIca, TooManyComponentsRejected) {
  std::mt19937_64 rng(11);
  EXPECT_THROW(fast_ica(random_matrix(2, 100, rng), {3}), ConfigError);
}

TEST(FastIca, NonConvergenceReturnsBestIterate) {
  std::mt19937_64 rng(12);
  const auto white = whiten(random_matrix(4, 4, rng) * independent_sources(4, 3000, rng));
  const auto ica = fast_ica(white.whitened, {4, Contrast::kLogCosh, 2, 1e-14, 5});
  EXPECT_FALSE(ica.converged);
  EXPECT_EQ(ica.iterations, 2);
  EXPECT_LT((ica.unmixing * ica.unmixing.transpose() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Dictionary, BasesHaveUnitNormAndInvertUnmixing) {
  std::mt19937_64 rng(13);
  const Matrix a = random_matrix(4, 4, rng);
  const auto white = whiten(a * independent_sources(4, 5000, rng));
  const auto ica = fast_ica(white.whitened, {4, Contrast::kLogCosh, 400, 1e-5, 1});
  const auto d = Dictionary::from_ica(0, LevelSpec{}, white.whitening, ica);
  for (Eigen::Index k = 0; k < d.components(); ++k) EXPECT_NEAR(d.bases().col(k).norm(), 1.0, 1e-12);
  // Each basis is a scaled column of the true mixing matrix.
  EXPECT_LT(amari_index(d.pinv() * a), 0.05);
}

// A one-channel "cochleogram" whose non-overlapping 2-frame windows are
// mixtures of two independent sources.
Cochleogram two_source_cochleogram(std::mt19937_64& rng, const Matrix& mixing, int windows) {
  const Matrix x = mixing * independent_sources(2, windows, rng);
  Cochleogram c;
  c.values.resize(1, 2 * windows);
  for (int j = 0; j < windows; ++j) c.values(0, 2 * j) = x(0, j), c.values(0, 2 * j + 1) = x(1, j);
  c.center_freqs = {1000};
  return c;
}

TEST(TrainHierarchy, SingleLevelMatchesFastIcaAlone) {
  std::mt19937_64 rng(14);
  const Matrix mixing = random_matrix(2, 2, rng);
  const std::vector<Cochleogram> corpus{two_source_cochleogram(rng, mixing, 3000),
                                        two_source_cochleogram(rng, mixing, 2000)};
  LevelSpec spec{2, 1, 2, 1, 1, 0.0, 0.0, 100000, 0};
  const HierarchyGeometry geometry({spec}, 1, 1000.0);
  const auto trained = train_hierarchy(corpus, geometry, {Contrast::kLogCosh, 400, 1e-5, 99});

  Matrix all(2, 5000);
  int col = 0;
  for (const auto& c : corpus)
    for (Eigen::Index j = 0; j < c.frames(); j += 2) all.col(col++) = c.values.block(0, j, 1, 2).transpose();
  const auto white = whiten(all);
  const auto ica = fast_ica(white.whitened, {2, Contrast::kLogCosh, 400, 1e-5, derive_seed(99, 1)});
  const auto direct = Dictionary::from_ica(0, spec, white.whitening, ica);
  EXPECT_LT((trained.hierarchy.levels[0].bases() - direct.bases()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(trained.reports[0].used, 5000u);
  EXPECT_LT(amari_index(direct.pinv() * mixing), 0.05);
}

std::vector<Cochleogram> random_corpus(int files, int frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Cochleogram> corpus(static_cast<std::size_t>(files));
  for (auto& c : corpus) c.values = testing::random_cochleogram_values(64, frames, rng);
  return corpus;
}

TEST(TrainHierarchy, Exp2ConfigDictionarySizes) {
  auto specs = testing::exp2_specs();
  for (auto& s : specs) s.max_examples = 1500, s.whiten_dim = s.components;
  const HierarchyGeometry geometry(specs, 64, 1000.0);
  const auto trained = train_hierarchy(random_corpus(30, 1300, 15), geometry, {Contrast::kLogCosh, 30, 1e-5, 1});
  ASSERT_EQ(trained.hierarchy.depth(), 3u);
  EXPECT_EQ(trained.hierarchy.levels[0].components(), 64);
  EXPECT_EQ(trained.hierarchy.levels[1].components(), 128);
  EXPECT_EQ(trained.hierarchy.levels[2].components(), 256);
  for (const auto& r : trained.reports) EXPECT_LE(r.used, 1500u);
}

TEST(TrainHierarchy, Exp1ConfigSizesAndReceptiveField) {
  const HierarchyGeometry geometry(testing::exp1_specs(), 64, 1000.0);
  EXPECT_EQ(geometry.level(0).components, 128);
  EXPECT_EQ(geometry.level(1).components, 256);
  EXPECT_EQ(geometry.level(2).components, 256);
  EXPECT_EQ(geometry.top_channels(), 64);
  EXPECT_DOUBLE_EQ(geometry.top_ms(), 360.0);
}

TEST(TrainHierarchy, InsufficientExamplesReportsCounts) {
  auto specs = testing::exp2_specs();
  const HierarchyGeometry geometry(specs, 64, 1000.0);
  try {
    train_hierarchy(random_corpus(1, 60, 16), geometry, {});
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("needs at least 64"), std::string::npos) << e.what();
  }
}

TEST(TrainHierarchy, RetrainingIsBitReproducible) {
  auto specs = testing::exp2_specs();
  specs.resize(2);
  for (auto& s : specs) s.max_examples = 800, s.whiten_dim = s.components;
  const HierarchyGeometry geometry(specs, 64, 1000.0);
  const auto corpus = random_corpus(8, 1300, 17);
  const auto a = train_hierarchy(corpus, geometry, {Contrast::kLogCosh, 20, 1e-5, 5});
  const auto b = train_hierarchy(corpus, geometry, {Contrast::kLogCosh, 20, 1e-5, 5});
  for (std::size_t h = 0; h < 2; ++h) EXPECT_EQ(a.hierarchy.levels[h].bases(), b.hierarchy.levels[h].bases());
}

TEST(DictionaryFile, RoundTrip) {
  auto specs = testing::exp2_specs();
  specs.resize(2);
  for (auto& s : specs) s.max_examples = 600, s.whiten_dim = s.components;
  const HierarchyGeometry geometry(specs, 64, 1000.0);
  const auto trained = train_hierarchy(random_corpus(8, 1300, 18), geometry, {Contrast::kLogCosh, 10, 1e-5, 5});
  std::stringstream buf;
  write_hierarchy(buf, trained.hierarchy);
  const auto back = read_hierarchy(buf);
  ASSERT_EQ(back.depth(), 2u);
  EXPECT_EQ(back.geometry.specs(), geometry.specs());
  for (std::size_t h = 0; h < 2; ++h) {
    EXPECT_LT((back.levels[h].bases() - trained.hierarchy.levels[h].bases()).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ(back.levels[h].whitening().out_dim(), trained.hierarchy.levels[h].whitening().out_dim());
  }
  std::stringstream bad("DICX");
  EXPECT_THROW(read_hierarchy(bad), FormatError);
}

TEST(Sparsity, LaplacianHasPositiveExcessKurtosis) {
  std::mt19937_64 rng(19);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);
  Matrix lap(3, 20000);
  for (Eigen::Index j = 0; j < lap.cols(); ++j)
    for (Eigen::Index i = 0; i < 3; ++i) lap(i, j) = (coin(rng) ? 1 : -1) * expo(rng) + 5.0 * i;
  EXPECT_NEAR(pooled_excess_kurtosis(lap), 3.0, 0.3);
  EXPECT_NEAR(pooled_excess_kurtosis(random_matrix(3, 20000, rng)), 0.0, 0.1);
}

}  // namespace
}  // namespace sparsehear
