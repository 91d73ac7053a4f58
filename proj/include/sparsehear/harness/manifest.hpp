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

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/hash.hpp"
#include "sparsehear/frontend/audio.hpp"
#include "sparsehear/harness/noise.hpp"

namespace sparsehear {

struct CorpusEntry {
  std::string path;
  std::string label;
  std::string speaker;
  std::string split = "train";  // train | test
  std::optional<NoiseSpec> noise;  // set in derived multi-condition manifests

  bool operator==(const CorpusEntry& o) const {
    const bool same_noise = noise.has_value() == o.noise.has_value() &&
                            (!noise || (noise->name == o.noise->name && noise->snr_db == o.noise->snr_db &&
                                        noise->seed == o.noise->seed));
    return path == o.path && label == o.label && speaker == o.speaker && split == o.split && same_noise;
  }
};

struct CorpusManifest {
  std::vector<CorpusEntry> entries;
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::vector<std::string> vocabulary() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (std::find(out.begin(), out.end(), e.label) == out.end()) out.push_back(e.label);
    return out;
  }

  CorpusManifest split(const std::string& which) const {
    CorpusManifest out{{}, base_dir};
    for (const auto& e : entries)
      if (e.split == which) out.entries.push_back(e);
    return out;
  }

  std::filesystem::path resolve(const CorpusEntry& e) const {
    const std::filesystem::path p(e.path);
    return p.is_absolute() ? p : base_dir / p;
  }
};

inline nlohmann::json to_json(const CorpusManifest& m) {
  auto arr = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json j{{"path", e.path}, {"label", e.label}, {"speaker", e.speaker}, {"split", e.split}};
    if (e.noise) {
      j["noise"] = {{"name", e.noise->name}, {"snr_db", snr_label(e.noise->snr_db)}, {"seed", e.noise->seed}};
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline CorpusManifest manifest_from_json(const nlohmann::json& j, std::filesystem::path base_dir = {}) {
  if (!j.is_array()) throw FormatError("manifest: expected a JSON array of entries");
  CorpusManifest m{{}, std::move(base_dir)};
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& o = j[k];
    const auto field = [&](const char* name) -> std::string {
      if (!o.contains(name) || !o[name].is_string()) {
        throw FormatError("manifest: entry " + std::to_string(k) + " lacks string field \"" + name + "\"");
      }
      return o[name].get<std::string>();
    };
    CorpusEntry e{field("path"), field("label"), o.value("speaker", std::string{}), o.value("split", std::string{"train"}),
                  std::nullopt};
    if (e.split != "train" && e.split != "test") {
      throw FormatError("manifest: entry " + std::to_string(k) + " has split \"" + e.split + "\"");
    }
    if (o.contains("noise")) {
      const auto& n = o["noise"];
      e.noise = NoiseSpec{n.at("name").get<std::string>(), parse_snr(n.at("snr_db").get<std::string>()),
                          n.at("seed").get<std::uint64_t>()};
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline CorpusManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

inline void write_manifest(const std::filesystem::path& path, const CorpusManifest& m) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write manifest " + path.string());
  out << to_json(m).dump(1) << '\n';
}

// Loads an entry's audio at the default rate, mixing its noise if any.
inline AudioSignal load_entry(const CorpusManifest& m, const CorpusEntry& e) {
  AudioSignal a = to_default_rate(read_wav(m.resolve(e).string()));
  if (e.noise && e.noise->snr_db != kCleanSnr) {
    const auto n = make_noise(e.noise->name, a.size(), a.sample_rate, e.noise->seed);
    a = mix_noise(a, n, e.noise->snr_db, derive_seed(e.noise->seed, 1)).signal;
  }
  return a;
}

// Every training entry paired with one seeded-random noise at snr_db.
inline CorpusManifest build_multicondition(const CorpusManifest& train, const std::vector<std::string>& noises,
                                           double snr_db = 20.0, std::uint64_t seed = 0) {
  if (noises.empty()) throw ConfigError("build_multicondition: at least one noise required");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, noises.size() - 1);
  CorpusManifest out = train;
  for (std::size_t k = 0; k < out.entries.size(); ++k) {
    out.entries[k].noise = NoiseSpec{noises[pick(rng)], snr_db, derive_seed(seed, k + 1)};
  }
  return out;
}

}  // namespace sparsehear
