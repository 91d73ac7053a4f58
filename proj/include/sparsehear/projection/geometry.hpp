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

// Window and block layout of the hierarchy. All levels live on one lattice:
// the level-0 window grid, whose step is the window size times one minus the
// level-0 overlap. A level-h block (h > 0) at lattice cell (i, j) is the
// concatenation of M x N level-(h-1) blocks that tile its receptive field
// without overlapping; the abstract-level overlap sets how far apart
// neighbouring level-h blocks sit on that level's output grid.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sparsehear/core/error.hpp"
#include "sparsehear/core/types.hpp"

namespace sparsehear {

struct LevelSpec {
  int components = 64;         // K
  int window_channels = 32;    // L_C, level 0 only
  int window_ms = 40;          // L_T, level 0 only
  int blocks_spectral = 2;     // M, levels > 0
  int blocks_temporal = 2;     // N, levels > 0
  double overlap_spectral = 0.0;
  double overlap_temporal = 0.0;
  int max_examples = 25000;
  int whiten_dim = 0;          // 0: whiten to full rank

  bool operator==(const LevelSpec&) const = default;
};

struct LevelGeometry {
  int level = 0;
  int components = 0;
  int blocks_spectral = 1;   // effective M (clamped to the channel axis)
  int blocks_temporal = 1;   // N
  int span_units_c = 1, span_units_t = 1;   // receptive field, lattice cells
  int stride_units_c = 1, stride_units_t = 1;  // output grid step, lattice cells
  int child_offset_c = 0, child_offset_t = 0;  // lattice distance between constituents
  int span_channels = 0, span_frames = 0;    // receptive field, cochleogram samples
  int input_dim = 0;                         // N_in
  bool clamped = false;                      // M reduced to fit the channel axis
};

class HierarchyGeometry {
 public:
  HierarchyGeometry() = default;

  HierarchyGeometry(std::vector<LevelSpec> specs, int n_channels, double frame_rate)
      : specs_(std::move(specs)), n_channels_(n_channels), frame_rate_(frame_rate) {
    if (specs_.empty()) throw ConfigError("hierarchy: at least one level required");
    if (n_channels < 1 || !(frame_rate > 0.0)) throw ConfigError("hierarchy: invalid cochleogram shape");
    const auto& base = specs_.front();
    const double frames_per_ms = frame_rate / 1000.0;
    const double window_frames_real = base.window_ms * frames_per_ms;
    const int window_frames = static_cast<int>(std::lround(window_frames_real));
    if (base.window_channels < 1 || base.window_channels > n_channels || window_frames < 1 ||
        std::abs(window_frames_real - window_frames) > 1e-9) {
      throw ConfigError("hierarchy: level-0 window " + std::to_string(base.window_channels) + "x" +
                        std::to_string(base.window_ms) + " ms does not fit " + std::to_string(n_channels) +
                        " channels at " + std::to_string(frame_rate) + " Hz");
    }
    check_overlap(base.overlap_spectral, 0);
    check_overlap(base.overlap_temporal, 0);
    step_c_ = static_cast<int>(std::lround(base.window_channels * (1.0 - base.overlap_spectral)));
    step_t_ = static_cast<int>(std::lround(window_frames * (1.0 - base.overlap_temporal)));
    if (step_c_ < 1 || step_t_ < 1 || base.window_channels % step_c_ != 0 || window_frames % step_t_ != 0) {
      throw ConfigError("hierarchy: level-0 overlap must divide the window into whole lattice steps");
    }

    for (std::size_t h = 0; h < specs_.size(); ++h) {
      const auto& s = specs_[h];
      if (s.components < 1) throw ConfigError("hierarchy: level " + std::to_string(h) + " needs K >= 1");
      LevelGeometry g;
      g.level = static_cast<int>(h);
      g.components = s.components;
      if (h == 0) {
        g.span_units_c = base.window_channels / step_c_;
        g.span_units_t = window_frames / step_t_;
        g.input_dim = base.window_channels * window_frames;
      } else {
        check_overlap(s.overlap_spectral, h);
        check_overlap(s.overlap_temporal, h);
        if (s.blocks_spectral < 1 || s.blocks_temporal < 1) {
          throw ConfigError("hierarchy: level " + std::to_string(h) + " needs M, N >= 1");
        }
        const auto& prev = levels_.back();
        const int fit = n_channels / prev.span_channels;
        g.blocks_spectral = std::max(1, std::min(s.blocks_spectral, fit));
        g.clamped = g.blocks_spectral != s.blocks_spectral;
        g.blocks_temporal = s.blocks_temporal;
        g.child_offset_c = prev.span_units_c;
        g.child_offset_t = prev.span_units_t;
        g.span_units_c = g.blocks_spectral * prev.span_units_c;
        g.span_units_t = g.blocks_temporal * prev.span_units_t;
        g.input_dim = g.blocks_spectral * g.blocks_temporal * prev.components;
      }
      g.stride_units_c = std::max(1, static_cast<int>(std::lround(g.span_units_c * (1.0 - s.overlap_spectral))));
      g.stride_units_t = std::max(1, static_cast<int>(std::lround(g.span_units_t * (1.0 - s.overlap_temporal))));
      g.span_channels = g.span_units_c * step_c_;
      g.span_frames = g.span_units_t * step_t_;
      if (g.span_channels > n_channels) {
        throw ConfigError("hierarchy: level " + std::to_string(h) + " spans more channels than available");
      }
      if (g.components > g.input_dim) {
        throw ConfigError("hierarchy: level " + std::to_string(h) + " K=" + std::to_string(g.components) +
                          " exceeds input dimension " + std::to_string(g.input_dim) + " (over-complete)");
      }
      levels_.push_back(g);
    }
  }

  const std::vector<LevelSpec>& specs() const { return specs_; }
  const std::vector<LevelGeometry>& levels() const { return levels_; }
  const LevelGeometry& level(std::size_t h) const { return levels_.at(h); }
  std::size_t depth() const { return levels_.size(); }
  int n_channels() const { return n_channels_; }
  double frame_rate() const { return frame_rate_; }
  int step_channels() const { return step_c_; }
  int step_frames() const { return step_t_; }

  // Top-level receptive field in channels and milliseconds.
  int top_channels() const { return levels_.back().span_channels; }
  double top_ms() const { return levels_.back().span_frames * 1000.0 / frame_rate_; }

  // Number of lattice cells along each axis at which a level-h block fits.
  int valid_rows(std::size_t h, int channels) const {
    const auto& g = levels_.at(h);
    return channels < g.span_channels ? 0 : (channels - g.span_channels) / step_c_ + 1;
  }
  int valid_cols(std::size_t h, Eigen::Index frames) const {
    const auto& g = levels_.at(h);
    return frames < g.span_frames ? 0 : static_cast<int>((frames - g.span_frames) / step_t_ + 1);
  }
  // Output-grid rows (lattice indices) of level h.
  std::vector<int> grid_rows(std::size_t h) const {
    std::vector<int> rows;
    const int n = valid_rows(h, n_channels_);
    for (int i = 0; i < n; i += levels_.at(h).stride_units_c) rows.push_back(i);
    return rows;
  }
  // Dimension contributed by level h to an assembled frame.
  int frame_dim(std::size_t h) const {
    return static_cast<int>(grid_rows(h).size()) * levels_.at(h).components;
  }
  int total_frame_dim() const {
    int d = 0;
    for (std::size_t h = 0; h < depth(); ++h) d += frame_dim(h);
    return d;
  }

 private:
  static void check_overlap(double o, std::size_t h) {
    if (!(o >= 0.0 && o < 1.0)) {
      throw ConfigError("hierarchy: level " + std::to_string(h) + " overlap must lie in [0, 1)");
    }
  }

  std::vector<LevelSpec> specs_;
  std::vector<LevelGeometry> levels_;
  int n_channels_ = 64;
  double frame_rate_ = 1000.0;
  int step_c_ = 1, step_t_ = 1;
};

}  // namespace sparsehear
