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

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/frontend/cochleogram.hpp"
#include "sparsehear/ica/dictionary.hpp"
#include "sparsehear/projection/geometry.hpp"
#include "sparsehear/projection/project.hpp"

namespace sparsehear {

// Computes block coefficients on demand for one cochleogram, caching every
// (level, i, j) so shared sub-blocks are projected once.
class BlockProjector {
 public:
  BlockProjector(const Matrix& values, const HierarchyGeometry& geometry, const std::vector<Dictionary>& dicts,
                 bool memoize = true)
      : values_(values), geometry_(geometry), dicts_(dicts), memoize_(memoize) {
    if (values.rows() != geometry.n_channels()) {
      throw ShapeError("projector: cochleogram has " + std::to_string(values.rows()) + " channels, hierarchy expects " +
                       std::to_string(geometry.n_channels()));
    }
    if (dicts.size() > geometry.depth()) throw ShapeError("projector: more dictionaries than geometry levels");
    for (std::size_t h = 0; h < dicts.size(); ++h) {
      if (dicts[h].input_dim() != geometry.level(h).input_dim) {
        throw ShapeError("projector: level " + std::to_string(h) + " dictionary expects " +
                         std::to_string(dicts[h].input_dim()) + " inputs, geometry gives " +
                         std::to_string(geometry.level(h).input_dim));
      }
    }
    for (std::size_t h = 0; h < geometry.depth(); ++h) {
      Cache c;
      c.rows = geometry.valid_rows(h, static_cast<int>(values.rows()));
      c.cols = geometry.valid_cols(h, values.cols());
      if (h < dicts.size() && memoize_) {
        c.values = Matrix::Zero(geometry.level(h).components, static_cast<Eigen::Index>(c.rows) * c.cols);
        c.done.assign(static_cast<std::size_t>(c.rows) * c.cols, 0);
      }
      cache_.push_back(std::move(c));
    }
  }

  int rows(std::size_t h) const { return cache_.at(h).rows; }
  int cols(std::size_t h) const { return cache_.at(h).cols; }
  std::uint64_t projections() const { return projections_; }

  // Raw input vector of a level-h block: the flattened window for h = 0
  // (channel-major), the concatenated child coefficients otherwise.
  Vector input(std::size_t h, int i, int j) {
    check_cell(h, i, j);
    const auto& g = geometry_.level(h);
    if (h == 0) {
      const int c0 = i * geometry_.step_channels();
      const int t0 = j * geometry_.step_frames();
      Vector x(g.span_channels * g.span_frames);
      Eigen::Index k = 0;
      for (int c = 0; c < g.span_channels; ++c) {
        for (int t = 0; t < g.span_frames; ++t) x(k++) = values_(c0 + c, t0 + t);
      }
      return x;
    }
    const auto child_k = geometry_.level(h - 1).components;
    Vector x(g.input_dim);
    Eigen::Index offset = 0;
    for (int a = 0; a < g.blocks_spectral; ++a) {
      for (int b = 0; b < g.blocks_temporal; ++b) {
        x.segment(offset, child_k) = coefficients(h - 1, i + a * g.child_offset_c, j + b * g.child_offset_t);
        offset += child_k;
      }
    }
    return x;
  }

  Vector coefficients(std::size_t h, int i, int j) {
    if (h >= dicts_.size()) throw ShapeError("projector: level " + std::to_string(h) + " has no dictionary");
    check_cell(h, i, j);
    auto& c = cache_[h];
    const std::size_t idx = static_cast<std::size_t>(i) * c.cols + j;
    if (memoize_ && c.done[idx]) return c.values.col(static_cast<Eigen::Index>(idx));
    Vector out = dicts_[h].pinv() * input(h, i, j);
    ++projections_;
    if (memoize_) {
      c.values.col(static_cast<Eigen::Index>(idx)) = out;
      c.done[idx] = 1;
    }
    return out;
  }

 private:
  struct Cache {
    int rows = 0, cols = 0;
    Matrix values;
    std::vector<char> done;
  };

  void check_cell(std::size_t h, int i, int j) const {
    const auto& c = cache_.at(h);
    if (i < 0 || j < 0 || i >= c.rows || j >= c.cols) {
      throw InvalidInput("projector: cell (" + std::to_string(i) + ", " + std::to_string(j) + ") outside level " +
                         std::to_string(h) + " lattice " + std::to_string(c.rows) + "x" + std::to_string(c.cols));
    }
  }

  const Matrix& values_;
  const HierarchyGeometry& geometry_;
  const std::vector<Dictionary>& dicts_;
  bool memoize_;
  std::vector<Cache> cache_;
  std::uint64_t projections_ = 0;
};

// Replicates the first and last frames `front` and `back` times.
inline Matrix replicate_pad(const Matrix& values, int front, int back) {
  if (values.cols() == 0) throw InvalidInput("replicate_pad: empty cochleogram");
  Matrix out(values.rows(), values.cols() + front + back);
  for (int t = 0; t < front; ++t) out.col(t) = values.col(0);
  out.middleCols(front, values.cols()) = values;
  for (int t = 0; t < back; ++t) out.col(front + values.cols() + t) = values.col(values.cols() - 1);
  return out;
}

struct HierarchyProjection {
  std::vector<CoefficientMap> levels;
  int pad_frames = 0;        // replicated frames added on each side
  Eigen::Index frames = 0;   // unpadded cochleogram length
  double frame_rate = 1000.0;
  bool short_input = false;  // shorter than the top-level receptive field
  std::uint64_t projections = 0;
};

// Frames of edge replication added on each side of every utterance.
inline int hierarchy_padding(const HierarchyGeometry& geometry) {
  return (geometry.levels().back().span_frames + 1) / 2;
}

inline HierarchyProjection project_hierarchy(const Cochleogram& coch, const DictionaryHierarchy& hier,
                                             bool memoize = true) {
  if (hier.depth() == 0) throw ConfigError("project_hierarchy: empty hierarchy");
  if (coch.frame_rate != hier.geometry.frame_rate()) {
    throw ShapeError("project_hierarchy: cochleogram at " + std::to_string(coch.frame_rate) +
                     " Hz, hierarchy trained at " + std::to_string(hier.geometry.frame_rate()) + " Hz");
  }
  HierarchyProjection out;
  out.frames = coch.frames();
  out.frame_rate = coch.frame_rate;
  out.pad_frames = hierarchy_padding(hier.geometry);
  out.short_input = coch.frames() < hier.geometry.levels().back().span_frames;
  if (out.short_input) {
    warn("project_hierarchy: utterance (" + std::to_string(coch.frames()) +
         " frames) shorter than the top-level receptive field; padded by edge replication");
  }
  const Matrix padded = replicate_pad(coch.values, out.pad_frames, out.pad_frames);
  BlockProjector projector(padded, hier.geometry, hier.levels, memoize);
  for (std::size_t h = 0; h < hier.depth(); ++h) {
    const auto& g = hier.geometry.level(h);
    CoefficientMap map;
    map.level = static_cast<int>(h);
    map.rows = hier.geometry.grid_rows(h);
    for (int j = 0; j < projector.cols(h); j += g.stride_units_t) map.cols.push_back(j);
    map.coefficients.resize(g.components, static_cast<Eigen::Index>(map.rows.size() * map.cols.size()));
    Eigen::Index k = 0;
    for (int i : map.rows) {
      for (int j : map.cols) map.coefficients.col(k++) = projector.coefficients(h, i, j);
    }
    out.levels.push_back(std::move(map));
  }
  out.projections = projector.projections();
  return out;
}

// Cochleogram patch (span_channels x span_frames) synthesized by a level-h
// coefficient vector: each level maps its coefficients through its bases and
// places the resulting child coefficients at their lattice offsets.
inline Matrix receptive_field(const DictionaryHierarchy& hier, std::size_t h, const Vector& coefficients) {
  if (h >= hier.depth()) throw ShapeError("receptive_field: level " + std::to_string(h) + " outside hierarchy");
  const auto& g = hier.geometry.level(h);
  if (coefficients.size() != g.components) {
    throw ShapeError("receptive_field: expected " + std::to_string(g.components) + " coefficients, got " +
                     std::to_string(coefficients.size()));
  }
  const Vector input = hier.levels[h].bases() * coefficients;
  Matrix patch = Matrix::Zero(g.span_channels, g.span_frames);
  if (h == 0) {
    Eigen::Index k = 0;
    for (int c = 0; c < g.span_channels; ++c)
      for (int t = 0; t < g.span_frames; ++t) patch(c, t) = input(k++);
    return patch;
  }
  const auto& child = hier.geometry.level(h - 1);
  Eigen::Index offset = 0;
  for (int a = 0; a < g.blocks_spectral; ++a) {
    for (int b = 0; b < g.blocks_temporal; ++b) {
      patch.block(a * child.span_channels, b * child.span_frames, child.span_channels, child.span_frames) =
          receptive_field(hier, h - 1, input.segment(offset, child.components));
      offset += child.components;
    }
  }
  return patch;
}

}  // namespace sparsehear
