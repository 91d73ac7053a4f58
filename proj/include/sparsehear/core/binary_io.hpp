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

// Little-endian binary readers/writers shared by all on-disk formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "sparsehear/core/error.hpp"

namespace sparsehear::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void write_pod(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

inline void write_u32(std::ostream& out, std::uint32_t v) { write_pod(out, v); }
inline void write_f32(std::ostream& out, float v) { write_pod(out, v); }
inline void write_f64(std::ostream& out, double v) { write_pod(out, v); }

inline void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("unexpected end of file");
  return value;
}

inline std::uint32_t read_u32(std::istream& in) { return read_pod<std::uint32_t>(in); }
inline float read_f32(std::istream& in) { return read_pod<float>(in); }
inline double read_f64(std::istream& in) { return read_pod<double>(in); }

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::array<char, 8> buf{};
  in.read(buf.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || std::string_view(buf.data(), magic.size()) != magic) {
    throw FormatError("bad magic, expected \"" + std::string(magic) + "\"");
  }
}

inline std::string read_string(std::istream& in, std::uint32_t max_len = 1u << 20) {
  const auto n = read_u32(in);
  if (n > max_len) throw FormatError("string length " + std::to_string(n) + " too large");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw FormatError("unexpected end of file");
  return s;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return in;
}

}  // namespace sparsehear::io
