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
#include <set>
#include <sstream>
#include <tuple>

#include "sparsehear/projection/binarize.hpp"
#include "sparsehear/projection/hierarchy.hpp"
#include "sparsehear/projection/project.hpp"
#include "test_support.hpp"

namespace sparsehear {
namespace {

using testing::random_matrix;

Dictionary make_dictionary(const Matrix& bases) { return Dictionary(0, LevelSpec{}, Whitening{}, bases); }

TEST(Project, OrthonormalDictionaryIsTranspose) {
  std::mt19937_64 rng(1);
  const Eigen::HouseholderQR<Matrix> qr(random_matrix(12, 12, rng));
  const Matrix q = qr.householderQ();
  const auto d = make_dictionary(q);
  const Matrix s = random_matrix(12, 7, rng);
  EXPECT_LT((project(d, s) - q.transpose() * s).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Project, RecoversKnownCoefficients) {
  std::mt19937_64 rng(2);
  Matrix d0 = random_matrix(20, 8, rng);
  d0.colwise().normalize();
  const Matrix c = random_matrix(8, 5, rng);
  EXPECT_LT((project(make_dictionary(d0), Matrix(d0 * c)) - c).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Project, DuplicatedColumnStaysFinite) {
  std::mt19937_64 rng(3);
  Matrix d0 = random_matrix(10, 4, rng);
  d0.col(3) = d0.col(1);
  const Matrix c = project(make_dictionary(d0), random_matrix(10, 6, rng));
  EXPECT_TRUE(c.allFinite());
}

TEST(Project, ShapeMismatchNamesBothShapes) {
  std::mt19937_64 rng(4);
  const auto d = make_dictionary(random_matrix(10, 4, rng));
  try {
    project(d, random_matrix(9, 2, rng));
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("9x2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("10"), std::string::npos) << msg;
  }
}

TEST(Project, LinearityProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + trial % 9, k = 1 + trial % n;
    const auto d = make_dictionary(random_matrix(n, k, rng));
    const Matrix s1 = random_matrix(n, 3, rng), s2 = random_matrix(n, 3, rng);
    const double a = coef(rng), b = coef(rng);
    const Matrix lhs = project(d, Matrix(a * s1 + b * s2));
    const Matrix rhs = a * project(d, s1) + b * project(d, s2);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
  }
}

TEST(Geometry, Exp2TopLevelCovers64By160) {
  const HierarchyGeometry g(testing::exp2_specs(), 64, 1000.0);
  EXPECT_EQ(g.top_channels(), 64);
  EXPECT_DOUBLE_EQ(g.top_ms(), 160.0);
  EXPECT_EQ(g.level(0).input_dim, 1280);
  EXPECT_EQ(g.level(1).input_dim, 256);
  EXPECT_EQ(g.level(2).input_dim, 256);
  EXPECT_TRUE(g.level(2).clamped);
  EXPECT_EQ(g.total_frame_dim(), 3 * 64 + 128 + 256);
}

TEST(Geometry, Exp1TopLevelCovers64By360) {
  const HierarchyGeometry g(testing::exp1_specs(), 64, 1000.0);
  EXPECT_EQ(g.top_channels(), 64);
  EXPECT_DOUBLE_EQ(g.top_ms(), 360.0);
  EXPECT_EQ(g.level(1).input_dim, 2 * 3 * 128);
}

TEST(Geometry, RejectsOvercompleteAndMisfit) {
  auto specs = testing::exp2_specs();
  specs[0].components = 2000;
  EXPECT_THROW(HierarchyGeometry(specs, 64, 1000.0), ConfigError);
  EXPECT_THROW(HierarchyGeometry(testing::exp2_specs(), 16, 1000.0), ConfigError);
  specs = testing::exp2_specs();
  specs[0].overlap_temporal = 0.3;
  EXPECT_THROW(HierarchyGeometry(specs, 64, 1000.0), ConfigError);
}

// Direct recursive evaluation on absolute (channel, frame) offsets,
// independent of the projector's lattice bookkeeping.
struct ReferenceProjector {
  const Matrix& values;
  const DictionaryHierarchy& hier;
  std::set<std::tuple<std::size_t, int, int>> visited;

  Vector operator()(std::size_t h, int c0, int t0) {
    visited.emplace(h, c0, t0);
    const auto& g = hier.geometry.level(h);
    Vector x(g.input_dim);
    if (h == 0) {
      Eigen::Index k = 0;
      for (int c = 0; c < g.span_channels; ++c)
        for (int t = 0; t < g.span_frames; ++t) x(k++) = values(c0 + c, t0 + t);
    } else {
      const auto& child = hier.geometry.level(h - 1);
      Eigen::Index k = 0;
      for (int a = 0; a < g.blocks_spectral; ++a)
        for (int b = 0; b < g.blocks_temporal; ++b) {
          x.segment(k, child.components) = (*this)(h - 1, c0 + a * child.span_channels, t0 + b * child.span_frames);
          k += child.components;
        }
    }
    return hier.levels[h].pinv() * x;
  }
};

class HierarchyProjectionTest : public ::testing::TestWithParam<int> {};

TEST_P(HierarchyProjectionTest, MatchesReferenceAndProjectsEachBlockOnce) {
  const bool exp1 = GetParam() == 1;
  const HierarchyGeometry geometry(exp1 ? testing::exp1_specs() : testing::exp2_specs(), 64, 1000.0);
  const auto hier = testing::random_hierarchy(geometry, 6);
  std::mt19937_64 rng(7);
  Cochleogram coch;
  coch.values = testing::random_cochleogram_values(64, 730, rng);
  const auto memo = project_hierarchy(coch, hier, true);
  const auto naive = project_hierarchy(coch, hier, false);

  const Matrix padded = replicate_pad(coch.values, memo.pad_frames, memo.pad_frames);
  ReferenceProjector ref{padded, hier, {}};
  for (std::size_t h = 0; h < geometry.depth(); ++h) {
    const auto& map = memo.levels[h];
    ASSERT_EQ(map.coefficients, naive.levels[h].coefficients);
    for (std::size_t r = 0; r < map.rows.size(); ++r)
      for (std::size_t c = 0; c < map.cols.size(); ++c) {
        const Vector expect =
            ref(h, map.rows[r] * geometry.step_channels(), map.cols[c] * geometry.step_frames());
        EXPECT_LT((map.at(r, c) - expect).cwiseAbs().maxCoeff(), 1e-9);
      }
  }
  EXPECT_EQ(memo.projections, ref.visited.size());
  EXPECT_GT(naive.projections, memo.projections);
  EXPECT_FALSE(memo.short_input);
}

INSTANTIATE_TEST_SUITE_P(Configs, HierarchyProjectionTest, ::testing::Values(1, 2));

TEST(HierarchyProjection, ShortInputIsPaddedAndFlagged) {
  const HierarchyGeometry geometry(testing::exp1_specs(), 64, 1000.0);
  const auto hier = testing::random_hierarchy(geometry, 8);
  std::mt19937_64 rng(9);
  Cochleogram coch;
  coch.values = testing::random_cochleogram_values(64, 120, rng);
  std::ostringstream sink;
  auto* saved = warning_stream();
  warning_stream() = &sink;
  const auto proj = project_hierarchy(coch, hier);
  warning_stream() = saved;
  EXPECT_TRUE(proj.short_input);
  EXPECT_NE(sink.str().find("shorter"), std::string::npos);
  const auto seq = binarize_sequence(proj, geometry, {});
  EXPECT_EQ(seq.size(), 12u);
}

TEST(Binarize, AllZeroGivesEmptyFrame) {
  const HierarchyGeometry geometry(testing::exp2_specs(), 64, 1000.0);
  EXPECT_TRUE(binarize_frame(Vector::Zero(geometry.total_frame_dim()), geometry, {0.1}).empty());
}

TEST(Binarize, FullBudgetKeepsEveryNonzero) {
  const HierarchyGeometry geometry(testing::exp2_specs(), 64, 1000.0);
  std::mt19937_64 rng(10);
  Vector v = random_matrix(geometry.total_frame_dim(), 1, rng);
  for (Eigen::Index i = 0; i < v.size(); i += 7) v(i) = 0.0;
  std::size_t nonzero = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) nonzero += v(i) != 0.0;
  EXPECT_EQ(binarize_frame(v, geometry, {1.0}).size(), nonzero);
}

TEST(Binarize, RandomCoefficientsMeetPerLevelBudget) {
  const HierarchyGeometry geometry(testing::exp2_specs(), 64, 1000.0);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector v = random_matrix(geometry.total_frame_dim(), 1, rng);
    const auto active = binarize_frame(v, geometry, {0.1});
    std::size_t offset = 0;
    for (std::size_t h = 0; h < geometry.depth(); ++h) {
      const auto dim = static_cast<std::size_t>(geometry.frame_dim(h));
      std::size_t count = 0;
      for (auto idx : active) count += idx >= offset && idx < offset + dim;
      EXPECT_LE(std::abs(static_cast<double>(count) - 0.1 * dim), 1.0);
      offset += dim;
    }
    EXPECT_TRUE(std::is_sorted(active.begin(), active.end()));
  }
}

TEST(Binarize, TopFractionMatchesSortOracle) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> small(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 40;
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = small(rng);  // many ties and zeros
    const BinarizePolicy policy{0.05 + 0.9 * (trial % 11) / 10.0};
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(v(a)) > std::abs(v(b)); });
    ActiveSet expect;
    for (std::size_t r = 0; r < policy.budget(n) && r < order.size(); ++r)
      if (v(order[r]) != 0.0) expect.push_back(static_cast<std::uint32_t>(order[r]));
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(top_fraction(v, policy), expect) << "trial " << trial;
  }
}

TEST(Binarize, TiesGoToLowerIndex) {
  Vector v(10);
  v << 1, -1, 1, 1, 1, 1, 1, 1, 1, 1;
  EXPECT_EQ(top_fraction(v, {0.2}), (ActiveSet{0, 1}));
}

TEST(Binarize, PolicyParsing) {
  EXPECT_DOUBLE_EQ(BinarizePolicy::parse("top_p=0.25").top_p, 0.25);
  EXPECT_EQ(BinarizePolicy::parse("top_p=0.1").to_string(), "top_p=0.1");
  EXPECT_THROW(BinarizePolicy::parse("p=0.1"), ConfigError);
  EXPECT_THROW(BinarizePolicy::parse("top_p=0"), ConfigError);
  EXPECT_THROW(BinarizePolicy::parse("top_p=0.1x"), ConfigError);
}

class FeatureSequenceTest : public ::testing::Test {
 protected:
  FeatureSequenceTest()
      : geometry(testing::exp2_specs(), 64, 1000.0), hier(testing::random_hierarchy(geometry, 13)) {
    std::mt19937_64 rng(14);
    coch.values = testing::random_cochleogram_values(64, 1234, rng);
  }
  HierarchyGeometry geometry;
  DictionaryHierarchy hier;
  Cochleogram coch;
};

TEST_F(FeatureSequenceTest, FrameCountAndSparsity) {
  const auto seq = extract_binary_features(coch, hier, {0.1});
  EXPECT_LE(std::abs(static_cast<long>(seq.size()) - 123L), 1L);
  EXPECT_EQ(seq.dim, 576u);
  EXPECT_EQ(seq.level_offsets, (std::vector<std::uint32_t>{0, 192, 320, 576}));
  for (std::size_t t = 0; t < seq.size(); ++t) {
    EXPECT_LE(seq.sparsity(t), 0.1 + 1e-12);
    for (auto idx : seq.frames[t]) EXPECT_LT(idx, seq.dim);
  }
}

TEST_F(FeatureSequenceTest, Deterministic) {
  const auto a = extract_binary_features(coch, hier, {0.1});
  const auto b = extract_binary_features(coch, hier, {0.1});
  EXPECT_EQ(a.frames, b.frames);
}

TEST_F(FeatureSequenceTest, FrameOutsideUtteranceRejected) {
  const auto proj = project_hierarchy(coch, hier);
  EXPECT_NO_THROW(assemble_and_binarize(proj, geometry, 122, {0.1}));
  EXPECT_THROW(assemble_and_binarize(proj, geometry, 123, {0.1}), InvalidInput);
}

TEST_F(FeatureSequenceTest, NearestBlockFollowsFrameCentre) {
  // Raw frame of the top level at time t equals the coefficients of the
  // block whose centre is nearest, found here by brute force.
  const auto proj = project_hierarchy(coch, hier);
  const auto& top = proj.levels.back();
  const auto& g = geometry.level(geometry.depth() - 1);
  for (std::size_t t : {0u, 40u, 77u, 122u}) {
    const Vector frame = assemble_frame(proj, geometry, t, 100.0);
    const double centre = (t + 0.5) * 10.0 + proj.pad_frames;
    std::size_t best = 0;
    for (std::size_t c = 1; c < top.cols.size(); ++c) {
      const auto dist = [&](std::size_t k) { return std::abs(top.cols[k] * 20.0 + g.span_frames / 2.0 - centre); };
      if (dist(c) < dist(best)) best = c;
    }
    EXPECT_EQ(frame.tail(g.components), top.at(0, best));
  }
}

TEST_F(FeatureSequenceTest, FileRoundTrip) {
  const auto seq = extract_binary_features(coch, hier, {0.1});
  std::stringstream buf;
  write_binary_features(buf, seq);
  const auto back = read_binary_features(buf);
  EXPECT_EQ(back.dim, seq.dim);
  EXPECT_EQ(back.frames, seq.frames);
  EXPECT_DOUBLE_EQ(back.frame_rate, 100.0);
}

TEST(FeatureFile, RejectsOutOfRangeIndex) {
  BinaryFeatureSequence seq;
  seq.dim = 4;
  seq.frames = {{1, 9}};
  std::stringstream buf;
  write_binary_features(buf, seq);
  EXPECT_THROW(read_binary_features(buf), FormatError);
}

TEST(ReceptiveField, ProjectingABaseFieldRecoversItsUnitVector) {
  const HierarchyGeometry geometry(testing::exp2_specs(), 64, 1000.0);
  const auto hier = testing::random_hierarchy(geometry, 21);
  for (std::size_t h = 0; h < hier.depth(); ++h) {
    const auto& g = geometry.level(h);
    for (int k : {0, g.components / 2, g.components - 1}) {
      const Vector unit = Vector::Unit(g.components, k);
      const Matrix patch = receptive_field(hier, h, unit);
      ASSERT_EQ(patch.rows(), g.span_channels);
      ASSERT_EQ(patch.cols(), g.span_frames);
      Matrix values = Matrix::Zero(64, g.span_frames);
      values.topRows(g.span_channels) = patch;
      BlockProjector projector(values, geometry, hier.levels);
      EXPECT_LT((projector.coefficients(h, 0, 0) - unit).cwiseAbs().maxCoeff(), 1e-8) << "level " << h << " base " << k;
    }
  }
}

TEST(ReceptiveField, LevelZeroIsTheReshapedBase) {
  const HierarchyGeometry geometry(testing::exp2_specs(), 64, 1000.0);
  const auto hier = testing::random_hierarchy(geometry, 22);
  const Matrix patch = receptive_field(hier, 0, Vector::Unit(64, 5));
  const auto& g = geometry.level(0);
  for (int c = 0; c < g.span_channels; ++c)
    for (int t = 0; t < g.span_frames; ++t) EXPECT_EQ(patch(c, t), hier.levels[0].bases()(c * g.span_frames + t, 5));
  EXPECT_THROW(receptive_field(hier, 3, Vector::Zero(64)), ShapeError);
  EXPECT_THROW(receptive_field(hier, 1, Vector::Zero(64)), ShapeError);
}

}  // namespace
}  // namespace sparsehear
