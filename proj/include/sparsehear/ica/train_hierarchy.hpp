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

// Level-by-level dictionary learning: level h is trained on inputs produced
// by projecting through the already-trained levels 0..h-1.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/hash.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/frontend/cochleogram.hpp"
#include "sparsehear/ica/dictionary.hpp"
#include "sparsehear/ica/fastica.hpp"
#include "sparsehear/ica/whitening.hpp"
#include "sparsehear/projection/hierarchy.hpp"

namespace sparsehear {

struct HierarchyTrainingOptions {
  Contrast contrast = Contrast::kLogCosh;
  int max_iter = 400;
  double tol = 1e-5;
  std::uint64_t seed = 0;

  bool operator==(const HierarchyTrainingOptions&) const = default;
};

struct LevelTrainingReport {
  int level = 0;
  std::size_t available = 0;
  std::size_t used = 0;
  int input_dim = 0;
  int whitened_dim = 0;
  int dropped_dims = 0;
  bool converged = false;
  int iterations = 0;
};

struct HierarchyTrainingResult {
  DictionaryHierarchy hierarchy;
  std::vector<LevelTrainingReport> reports;
};

// Draws up to `budget` level-h input vectors uniformly over all lattice cells
// of the corpus where a full level-h block fits.
inline Matrix sample_level_inputs(const std::vector<const Matrix*>& corpus, const HierarchyGeometry& geometry,
                                  const std::vector<Dictionary>& trained, std::size_t h, std::size_t budget,
                                  std::uint64_t seed, std::size_t* available) {
  std::vector<std::uint64_t> starts{0};
  for (const Matrix* m : corpus) {
    const auto cells = static_cast<std::uint64_t>(geometry.valid_rows(h, static_cast<int>(m->rows()))) *
                       static_cast<std::uint64_t>(geometry.valid_cols(h, m->cols()));
    starts.push_back(starts.back() + cells);
  }
  const std::uint64_t total = starts.back();
  *available = static_cast<std::size_t>(total);
  const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(total, budget));
  std::vector<std::uint64_t> picks;
  picks.reserve(n);
  if (n == total) {
    picks.resize(n);
    std::iota(picks.begin(), picks.end(), 0ull);
  } else {
    // Floyd's algorithm: n distinct draws from [0, total).
    std::mt19937_64 rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(n * 2);
    for (std::uint64_t j = total - n; j < total; ++j) {
      const std::uint64_t r = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
      chosen.insert(chosen.count(r) ? j : r);
    }
    picks.assign(chosen.begin(), chosen.end());
    std::sort(picks.begin(), picks.end());
  }

  const int dim = geometry.level(h).input_dim;
  Matrix out(dim, static_cast<Eigen::Index>(n));
  std::size_t file = 0;
  Eigen::Index col = 0;
  while (col < static_cast<Eigen::Index>(n)) {
    const std::uint64_t pick = picks[static_cast<std::size_t>(col)];
    while (pick >= starts[file + 1]) ++file;
    BlockProjector projector(*corpus[file], geometry, trained);
    const int cols = projector.cols(h);
    for (; col < static_cast<Eigen::Index>(n) && picks[static_cast<std::size_t>(col)] < starts[file + 1]; ++col) {
      const std::uint64_t local = picks[static_cast<std::size_t>(col)] - starts[file];
      out.col(col) = projector.input(h, static_cast<int>(local / cols), static_cast<int>(local % cols));
    }
  }
  return out;
}

inline HierarchyTrainingResult train_hierarchy(const std::vector<Cochleogram>& corpus, const HierarchyGeometry& geometry,
                                               const HierarchyTrainingOptions& opt) {
  if (corpus.empty()) throw InvalidInput("train_hierarchy: empty corpus");
  std::vector<const Matrix*> values;
  for (const auto& c : corpus) {
    if (c.channels() != geometry.n_channels()) {
      throw ShapeError("train_hierarchy: cochleogram has " + std::to_string(c.channels()) + " channels, expected " +
                       std::to_string(geometry.n_channels()));
    }
    values.push_back(&c.values);
  }
  HierarchyTrainingResult result;
  result.hierarchy.geometry = geometry;
  for (std::size_t h = 0; h < geometry.depth(); ++h) {
    const auto& spec = geometry.specs()[h];
    const auto& g = geometry.level(h);
    LevelTrainingReport report;
    report.level = static_cast<int>(h);
    report.input_dim = g.input_dim;
    Matrix batch = sample_level_inputs(values, geometry, result.hierarchy.levels, h,
                                       static_cast<std::size_t>(std::max(spec.max_examples, 0)),
                                       derive_seed(opt.seed, 2 * h), &report.available);
    report.used = static_cast<std::size_t>(batch.cols());
    if (report.used < static_cast<std::size_t>(g.components)) {
      throw InvalidInput("train_hierarchy: level " + std::to_string(h) + " needs at least " +
                         std::to_string(g.components) + " examples, corpus provides " +
                         std::to_string(report.available));
    }
    if (report.used < 10 * static_cast<std::size_t>(g.input_dim)) {
      warn("train_hierarchy: level " + std::to_string(h) + " has " + std::to_string(report.used) +
           " examples for " + std::to_string(g.input_dim) + " dimensions (10x recommended)");
    }
    auto white = whiten(std::move(batch), spec.whiten_dim);
    report.whitened_dim = static_cast<int>(white.whitening.out_dim());
    report.dropped_dims = white.whitening.dropped;
    if (g.components > report.whitened_dim) {
      throw NumericError("train_hierarchy: level " + std::to_string(h) + " asks for " + std::to_string(g.components) +
                         " components but the data has rank " + std::to_string(report.whitened_dim));
    }
    FastIcaOptions ica_opt{g.components, opt.contrast, opt.max_iter, opt.tol, derive_seed(opt.seed, 2 * h + 1)};
    const auto ica = fast_ica(white.whitened, ica_opt);
    report.converged = ica.converged;
    report.iterations = ica.iterations;
    result.hierarchy.levels.push_back(Dictionary::from_ica(static_cast<int>(h), spec, std::move(white.whitening), ica));
    result.reports.push_back(report);
  }
  return result;
}

}  // namespace sparsehear
