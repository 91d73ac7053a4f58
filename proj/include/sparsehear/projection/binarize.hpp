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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sparsehear/core/binary_io.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/projection/hierarchy.hpp"

namespace sparsehear {

// Per-level competition: keep the top fraction of coefficients by magnitude.
struct BinarizePolicy {
  double top_p = 0.1;

  bool operator==(const BinarizePolicy&) const = default;

  // Number of winners allowed in a level of the given dimension.
  std::size_t budget(std::size_t dim) const {
    return static_cast<std::size_t>(std::floor(top_p * static_cast<double>(dim) + 1e-9));
  }

  static BinarizePolicy parse(const std::string& text) {
    const std::string key = "top_p=";
    if (text.rfind(key, 0) != 0) throw ConfigError("policy must look like top_p=<fraction>, got \"" + text + "\"");
    BinarizePolicy p;
    try {
      std::size_t used = 0;
      p.top_p = std::stod(text.substr(key.size()), &used);
      if (used != text.size() - key.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("policy: cannot parse \"" + text + "\"");
    }
    if (!(p.top_p > 0.0 && p.top_p <= 1.0)) throw ConfigError("policy: top_p must lie in (0, 1]");
    return p;
  }
  // Shortest text that parses back to the same value.
  std::string to_string() const {
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, top_p).ptr;
    return "top_p=" + std::string(buf, end);
  }
};

struct BinaryFeatureSequence {
  std::uint32_t dim = 0;
  double frame_rate = 100.0;
  std::vector<ActiveSet> frames;
  std::vector<std::uint32_t> level_offsets;  // start index of each level; last entry == dim

  std::size_t size() const { return frames.size(); }
  double sparsity(std::size_t t) const {
    return dim == 0 ? 0.0 : static_cast<double>(frames.at(t).size()) / dim;
  }
};

// Winners among `values` (indices relative to the vector), sorted ascending.
// Ties in magnitude go to the lower index; exact zeros never win.
inline ActiveSet top_fraction(const Vector& values, const BinarizePolicy& policy) {
  const auto n = static_cast<std::size_t>(values.size());
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  const std::size_t k = std::min(policy.budget(n), n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      const double ma = std::abs(values(a)), mb = std::abs(values(b));
                      return ma != mb ? ma > mb : a < b;
                    });
  ActiveSet out;
  for (std::size_t r = 0; r < k; ++r) {
    if (std::abs(values(order[r])) > 0.0) out.push_back(order[r]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Concatenated real-valued frame at feature index t: per level, every grid
// row's block whose temporal centre is nearest the frame centre.
inline Vector assemble_frame(const HierarchyProjection& proj, const HierarchyGeometry& geometry, std::size_t t,
                             double feature_rate) {
  const auto n_frames = static_cast<std::size_t>(
      std::floor(static_cast<double>(proj.frames) / proj.frame_rate * feature_rate + 1e-9));
  if (t >= n_frames) {
    throw InvalidInput("assemble: frame " + std::to_string(t) + " outside utterance of " + std::to_string(n_frames) +
                       " frames");
  }
  const double centre = (static_cast<double>(t) + 0.5) * proj.frame_rate / feature_rate + proj.pad_frames;
  Vector out(geometry.total_frame_dim());
  Eigen::Index offset = 0;
  for (std::size_t h = 0; h < proj.levels.size(); ++h) {
    const auto& map = proj.levels[h];
    const auto& g = geometry.level(h);
    if (map.cols.empty()) throw InvalidInput("assemble: level " + std::to_string(h) + " has no blocks");
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < map.cols.size(); ++c) {
      const double block_centre = map.cols[c] * geometry.step_frames() + g.span_frames / 2.0;
      const double d = std::abs(block_centre - centre);
      if (d < best_dist) {
        best_dist = d;
        best = c;
      }
    }
    for (std::size_t r = 0; r < map.rows.size(); ++r) {
      out.segment(offset, g.components) = map.at(r, best);
      offset += g.components;
    }
  }
  return out;
}

inline ActiveSet binarize_frame(const Vector& frame, const HierarchyGeometry& geometry, const BinarizePolicy& policy) {
  ActiveSet out;
  Eigen::Index offset = 0;
  for (std::size_t h = 0; h < geometry.depth(); ++h) {
    const int dim = geometry.frame_dim(h);
    for (auto idx : top_fraction(frame.segment(offset, dim), policy)) {
      out.push_back(static_cast<std::uint32_t>(offset) + idx);
    }
    offset += dim;
  }
  return out;
}

inline ActiveSet assemble_and_binarize(const HierarchyProjection& proj, const HierarchyGeometry& geometry,
                                       std::size_t t, const BinarizePolicy& policy, double feature_rate = 100.0) {
  return binarize_frame(assemble_frame(proj, geometry, t, feature_rate), geometry, policy);
}

inline BinaryFeatureSequence binarize_sequence(const HierarchyProjection& proj, const HierarchyGeometry& geometry,
                                               const BinarizePolicy& policy, double feature_rate = 100.0) {
  BinaryFeatureSequence seq;
  seq.dim = static_cast<std::uint32_t>(geometry.total_frame_dim());
  seq.frame_rate = feature_rate;
  std::uint32_t off = 0;
  for (std::size_t h = 0; h < geometry.depth(); ++h) {
    seq.level_offsets.push_back(off);
    off += static_cast<std::uint32_t>(geometry.frame_dim(h));
  }
  seq.level_offsets.push_back(off);
  const auto n = static_cast<std::size_t>(
      std::floor(static_cast<double>(proj.frames) / proj.frame_rate * feature_rate + 1e-9));
  for (std::size_t t = 0; t < n; ++t) seq.frames.push_back(assemble_and_binarize(proj, geometry, t, policy, feature_rate));
  return seq;
}

inline BinaryFeatureSequence extract_binary_features(const Cochleogram& coch, const DictionaryHierarchy& hier,
                                                     const BinarizePolicy& policy, double feature_rate = 100.0) {
  return binarize_sequence(project_hierarchy(coch, hier), hier.geometry, policy, feature_rate);
}

// "BFV1", u32 dim, f32 frame_rate, u32 n_frames, per frame u32 count + sorted u32 indices.
inline void write_binary_features(std::ostream& out, const BinaryFeatureSequence& seq) {
  io::write_magic(out, "BFV1");
  io::write_u32(out, seq.dim);
  io::write_f32(out, static_cast<float>(seq.frame_rate));
  io::write_u32(out, static_cast<std::uint32_t>(seq.frames.size()));
  for (const auto& f : seq.frames) {
    io::write_u32(out, static_cast<std::uint32_t>(f.size()));
    for (auto idx : f) io::write_u32(out, idx);
  }
}

inline BinaryFeatureSequence read_binary_features(std::istream& in) {
  io::expect_magic(in, "BFV1");
  BinaryFeatureSequence seq;
  seq.dim = io::read_u32(in);
  seq.frame_rate = io::read_f32(in);
  const auto n = io::read_u32(in);
  seq.frames.resize(n);
  for (auto& f : seq.frames) {
    const auto count = io::read_u32(in);
    if (count > seq.dim) throw FormatError("BFV1: frame has more active indices than dimensions");
    f.resize(count);
    for (auto& idx : f) {
      idx = io::read_u32(in);
      if (idx >= seq.dim) throw FormatError("BFV1: active index out of range");
    }
    if (!std::is_sorted(f.begin(), f.end())) throw FormatError("BFV1: active indices not sorted");
  }
  return seq;
}

}  // namespace sparsehear
