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

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sparsehear/core/binary_io.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/linalg.hpp"
#include "sparsehear/core/types.hpp"
#include "sparsehear/ica/fastica.hpp"
#include "sparsehear/ica/whitening.hpp"
#include "sparsehear/projection/geometry.hpp"

namespace sparsehear {

// One level of learned bases. Columns of `bases` are unit-norm mixing
// directions; coefficients are obtained through the cached pseudo-inverse.
class Dictionary {
 public:
  Dictionary() = default;

  Dictionary(int level, LevelSpec spec, Whitening whitening, Matrix bases)
      : level_(level), spec_(std::move(spec)), whitening_(std::move(whitening)), bases_(std::move(bases)) {
    normalize_columns();
    pinv_ = pseudo_inverse(bases_);
  }

  // Composes whitening and unmixing into a single mixing matrix.
  static Dictionary from_ica(int level, LevelSpec spec, Whitening whitening, const FastIcaResult& ica) {
    const Matrix separating = ica.unmixing * whitening.transform;  // K x N_in
    Dictionary d(level, std::move(spec), std::move(whitening), pseudo_inverse(separating));
    d.converged_ = ica.converged;
    d.iterations_ = ica.iterations;
    return d;
  }

  int level() const { return level_; }
  const LevelSpec& spec() const { return spec_; }
  const Whitening& whitening() const { return whitening_; }
  const Matrix& bases() const { return bases_; }
  const Matrix& pinv() const { return pinv_; }
  Eigen::Index input_dim() const { return bases_.rows(); }
  Eigen::Index components() const { return bases_.cols(); }
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }

 private:
  void normalize_columns() {
    for (Eigen::Index k = 0; k < bases_.cols(); ++k) {
      const double norm = bases_.col(k).norm();
      if (!(norm > 0.0)) throw NumericError("dictionary: zero basis vector at column " + std::to_string(k));
      bases_.col(k) /= norm;
    }
  }

  int level_ = 0;
  LevelSpec spec_;
  Whitening whitening_;
  Matrix bases_;
  Matrix pinv_;
  bool converged_ = true;
  int iterations_ = 0;
};

struct DictionaryHierarchy {
  HierarchyGeometry geometry;
  std::vector<Dictionary> levels;

  std::size_t depth() const { return levels.size(); }
};

inline constexpr std::uint32_t kDictionaryVersion = 1;

namespace detail {

inline void write_matrix_f32(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) io::write_f32(out, static_cast<float>(m(r, c)));
  }
}

inline Matrix read_matrix_f32(std::istream& in, std::uint32_t rows, std::uint32_t cols) {
  Matrix m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = io::read_f32(in);
  }
  return m;
}

}  // namespace detail

// Layout: "DICT", u32 version, u32 level_count, f32 frame_rate, then per level
// a geometry block {u32 K, L_C, L_T, M, N, n_channels, whiten_rows, max_examples,
// whiten_dim; f32 overlap_spectral, overlap_temporal}, u32 N_in, u32 K, and f32 row-major
// whitening mean (N_in), whitening transform (whiten_rows x N_in), bases (N_in x K).
inline void write_hierarchy(std::ostream& out, const DictionaryHierarchy& hier) {
  io::write_magic(out, "DICT");
  io::write_u32(out, kDictionaryVersion);
  io::write_u32(out, static_cast<std::uint32_t>(hier.depth()));
  io::write_f32(out, static_cast<float>(hier.geometry.frame_rate()));
  for (const auto& d : hier.levels) {
    const auto& s = d.spec();
    for (int v : {s.components, s.window_channels, s.window_ms, s.blocks_spectral, s.blocks_temporal,
                  hier.geometry.n_channels(), static_cast<int>(d.whitening().out_dim()), s.max_examples,
                  s.whiten_dim}) {
      io::write_u32(out, static_cast<std::uint32_t>(v));
    }
    io::write_f32(out, static_cast<float>(s.overlap_spectral));
    io::write_f32(out, static_cast<float>(s.overlap_temporal));
    io::write_u32(out, static_cast<std::uint32_t>(d.input_dim()));
    io::write_u32(out, static_cast<std::uint32_t>(d.components()));
    detail::write_matrix_f32(out, d.whitening().mean.transpose());
    detail::write_matrix_f32(out, d.whitening().transform);
    detail::write_matrix_f32(out, d.bases());
  }
}

inline DictionaryHierarchy read_hierarchy(std::istream& in) {
  io::expect_magic(in, "DICT");
  const auto version = io::read_u32(in);
  if (version != kDictionaryVersion) throw FormatError("DICT: unsupported version " + std::to_string(version));
  const auto depth = io::read_u32(in);
  if (depth == 0 || depth > 64) throw FormatError("DICT: implausible level count " + std::to_string(depth));
  const double frame_rate = io::read_f32(in);
  std::vector<LevelSpec> specs;
  std::vector<Dictionary> dicts;
  int n_channels = 0;
  for (std::uint32_t h = 0; h < depth; ++h) {
    LevelSpec s;
    s.components = static_cast<int>(io::read_u32(in));
    s.window_channels = static_cast<int>(io::read_u32(in));
    s.window_ms = static_cast<int>(io::read_u32(in));
    s.blocks_spectral = static_cast<int>(io::read_u32(in));
    s.blocks_temporal = static_cast<int>(io::read_u32(in));
    n_channels = static_cast<int>(io::read_u32(in));
    const auto whiten_rows = io::read_u32(in);
    s.max_examples = static_cast<int>(io::read_u32(in));
    s.whiten_dim = static_cast<int>(io::read_u32(in));
    s.overlap_spectral = io::read_f32(in);
    s.overlap_temporal = io::read_f32(in);
    const auto n_in = io::read_u32(in);
    const auto k = io::read_u32(in);
    if (n_in > (1u << 20) || k > n_in || whiten_rows > n_in) throw FormatError("DICT: corrupt level header");
    Whitening w;
    w.mean = detail::read_matrix_f32(in, 1, n_in).transpose();
    w.transform = detail::read_matrix_f32(in, whiten_rows, n_in);
    Matrix bases = detail::read_matrix_f32(in, n_in, k);
    specs.push_back(s);
    dicts.emplace_back(static_cast<int>(h), s, std::move(w), std::move(bases));
  }
  DictionaryHierarchy hier{HierarchyGeometry(specs, n_channels, frame_rate), std::move(dicts)};
  for (std::size_t h = 0; h < hier.depth(); ++h) {
    if (hier.levels[h].input_dim() != hier.geometry.level(h).input_dim) {
      throw FormatError("DICT: level " + std::to_string(h) + " input dimension disagrees with its geometry");
    }
  }
  return hier;
}

}  // namespace sparsehear
