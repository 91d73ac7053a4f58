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
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparsehear/core/error.hpp"
#include "sparsehear/core/hash.hpp"
#include "sparsehear/pipeline/config.hpp"
#include "sparsehear/pipeline/systems.hpp"

namespace sparsehear {

struct RunOptions {
  std::filesystem::path cache_dir;  // empty: no caching
  std::filesystem::path out_dir;    // empty: nothing written
};

struct RunResult {
  ExperimentConfig config;
  std::string config_hash;
  std::unique_ptr<WordRecognizer> system;
  EvaluationReport report;
  std::vector<std::string> cache_hits;  // stages restored from the cache
  std::vector<LevelTrainingReport> dictionary_reports;
  std::vector<WordTrainingReport> model_reports;
};

namespace run_detail {

// Runs one stage, prefixing any failure with the stage name.
template <class F>
decltype(auto) stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(std::string("stage ") + name + ": " + e.what(), e.code());
  } catch (const std::exception& e) {
    throw Error(std::string("stage ") + name + ": " + e.what(), ExitCode::kData);
  }
}

inline std::string key_of(const nlohmann::json& j) { return hex64(fnv1a(j.dump())); }

inline nlohmann::json meta(const std::string& stage, const std::string& key, const ExperimentConfig& cfg,
                           const std::string& config_hash) {
  return {{"stage", stage}, {"key", key}, {"config", cfg.name}, {"config_hash", config_hash}, {"seed", cfg.seed}};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + tmp);
    out << bytes;
    if (!out) throw InvalidInput("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Artifact bytes plus a sidecar .meta.json.
inline void store(const std::filesystem::path& path, const std::string& bytes, const nlohmann::json& m) {
  write_file(path, bytes);
  write_file(path.string() + ".meta.json", m.dump(1) + "\n");
}

class Cache {
 public:
  explicit Cache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<std::string> get(const std::string& stage, const std::string& key, const char* ext) const {
    if (dir_.empty()) return std::nullopt;
    const auto path = file(stage, key, ext);
    auto m = read_file(path.string() + ".meta.json");
    if (!m) return std::nullopt;
    try {
      if (nlohmann::json::parse(*m).at("key").get<std::string>() != key) return std::nullopt;
    } catch (const nlohmann::json::exception&) {
      warn("cache: unreadable metadata for " + path.string() + "; recomputing");
      return std::nullopt;
    }
    return read_file(path);
  }

  void put(const std::string& stage, const std::string& key, const char* ext, const std::string& bytes,
           const nlohmann::json& m) const {
    if (!dir_.empty()) store(file(stage, key, ext), bytes, m);
  }

 private:
  std::filesystem::path file(const std::string& stage, const std::string& key, const char* ext) const {
    return dir_ / (stage + "-" + key + ext);
  }

  std::filesystem::path dir_;
};

template <class T, class W>
std::string serialize(const T& value, W write) {
  std::ostringstream out(std::ios::binary);
  write(out, value);
  return out.str();
}

template <class R>
R deserialize(const std::string& bytes, R (*read)(std::istream&)) {
  std::istringstream in(bytes, std::ios::binary);
  return read(in);
}

}  // namespace run_detail

// train-dict -> extract -> train-model -> evaluate. Intermediates are cached
// under keys hashed from exactly the inputs that determine them; cold results
// pass through their serialized form so cached and cold runs agree bit for bit.
inline RunResult run_pipeline(const ExperimentConfig& config, const Corpus& corpus, const RunOptions& options = {}) {
  using namespace run_detail;
  validate(config);
  if (corpus.train.empty()) throw InvalidInput("run: corpus has no training utterances");
  if (corpus.test.empty()) throw InvalidInput("run: corpus has no test utterances");
  RunResult result;
  result.config = config;
  result.config_hash = config_hash(config);
  const auto full = to_json(config);
  const Cache cache(options.cache_dir);
  const auto train_hash = hex64(corpus_hash(corpus.train));
  const auto test_hash = hex64(corpus_hash(corpus.test));

  std::optional<std::vector<LabeledAudio>> train;
  const auto training = [&]() -> const std::vector<LabeledAudio>& {
    if (!train) train = stage("mix-training", [&] { return training_audio(config, corpus); });
    return *train;
  };

  std::string dict_key, model_key;
  std::string dict_bytes, model_bytes;
  if (config.system == "sparse") {
    dict_key = key_of({{"stage", "dictionary"},
                                  {"frontend", full["frontend"]},
                                  {"hierarchy", full["hierarchy"]},
                                  {"ica", full["ica"]},
                                  {"training", full["training"]},
                                  {"seed", config.seed},
                                  {"corpus", train_hash}});
    DictionaryHierarchy dict;
    if (auto hit = cache.get("dictionary", dict_key, ".dict")) {
      dict = stage("train-dict", [&] { return deserialize(*hit, &read_hierarchy); });
      dict_bytes = *hit;
      result.cache_hits.push_back("train-dict");
    } else {
      auto trained = stage("train-dict", [&] { return SparseSystem::train_dictionary(config, training()); });
      result.dictionary_reports = trained.reports;
      dict_bytes = serialize(trained.hierarchy, &write_hierarchy);
      dict = deserialize(dict_bytes, &read_hierarchy);
      cache.put("dictionary", dict_key, ".dict", dict_bytes, meta("dictionary", dict_key, config, result.config_hash));
    }
    model_key = key_of({{"stage", "models"},
                        {"dictionary", dict_key},
                        {"policy", full["policy"]},
                        {"model", full["model"]},
                        {"seed", config.seed}});
    Recognizer<BernoulliMixture> models;
    if (auto hit = cache.get("models", model_key, ".whmm")) {
      models = stage("train-model", [&] { return deserialize(*hit, &read_recognizer<BernoulliMixture>); });
      model_bytes = *hit;
      result.cache_hits.push_back("train-model");
    } else {
      const auto trained = stage("train-model", [&] {
        return SparseSystem::train_models(config, dict, training(), &result.model_reports);
      });
      model_bytes = serialize(trained, &write_recognizer<BernoulliMixture>);
      models = deserialize(model_bytes, &read_recognizer<BernoulliMixture>);
      cache.put("models", model_key, ".whmm", model_bytes, meta("models", model_key, config, result.config_hash));
    }
    result.system = std::make_unique<SparseSystem>(config, std::move(dict), std::move(models));
  } else {
    model_key = key_of({{"stage", "models"},
                        {"mfcc", full["mfcc"]},
                        {"model", full["model"]},
                        {"training", full["training"]},
                        {"seed", config.seed},
                        {"corpus", train_hash}});
    Recognizer<GaussianMixture> models;
    if (auto hit = cache.get("models", model_key, ".whmm")) {
      models = stage("train-model", [&] { return deserialize(*hit, &read_recognizer<GaussianMixture>); });
      model_bytes = *hit;
      result.cache_hits.push_back("train-model");
    } else {
      const auto trained =
          stage("train-model", [&] { return MfccSystem::train_models(config, training(), &result.model_reports); });
      model_bytes = serialize(trained, &write_recognizer<GaussianMixture>);
      models = deserialize(model_bytes, &read_recognizer<GaussianMixture>);
      cache.put("models", model_key, ".whmm", model_bytes, meta("models", model_key, config, result.config_hash));
    }
    result.system = std::make_unique<MfccSystem>(config, std::move(models));
  }

  const auto report_key = key_of({{"stage", "report"},
                                  {"models", model_key},
                                  {"evaluation", full["evaluation"]},
                                  {"seed", config.seed},
                                  {"corpus", test_hash}});
  std::string report_bytes;
  if (auto hit = cache.get("report", report_key, ".json")) {
    result.report = stage("evaluate", [&] { return EvaluationReport::from_json(nlohmann::json::parse(*hit)); });
    report_bytes = *hit;
    result.cache_hits.push_back("evaluate");
  } else {
    auto report = stage("evaluate", [&] { return evaluate_system(*result.system, config, corpus.test); });
    report.extra = {{"config", config.name},
                    {"config_hash", result.config_hash},
                    {"seed", config.seed},
                    {"training", config.training.condition},
                    {"train_corpus", train_hash},
                    {"test_corpus", test_hash}};
    report_bytes = report.to_json().dump(1) + "\n";
    result.report = EvaluationReport::from_json(nlohmann::json::parse(report_bytes));
    cache.put("report", report_key, ".json", report_bytes, meta("report", report_key, config, result.config_hash));
  }

  if (!options.out_dir.empty()) {
    stage("write-artifacts", [&] {
      const auto& dir = options.out_dir;
      auto echo = full;
      echo["config_hash"] = result.config_hash;
      write_file(dir / "config.json", echo.dump(1) + "\n");
      if (!dict_bytes.empty()) store(dir / "dictionary.dict", dict_bytes, meta("dictionary", dict_key, config, result.config_hash));
      store(dir / "models.whmm", model_bytes, meta("models", model_key, config, result.config_hash));
      store(dir / "report.json", report_bytes, meta("report", report_key, config, result.config_hash));
      write_file(dir / "report.csv", result.report.to_csv());
      return 0;
    });
  }
  return result;
}

}  // namespace sparsehear
