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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sparsehear/pipeline/config.hpp"
#include "sparsehear/pipeline/run.hpp"
#include "sparsehear/pipeline/systems.hpp"

namespace sparsehear {
namespace {

namespace fs = std::filesystem;

ExperimentConfig random_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ExperimentConfig c = preset(coin(rng) ? "sparse-exp2" : "mfcc-baseline");
  c.name = "random" + std::to_string(rng() % 1000);
  c.seed = rng();
  c.frontend.pre_emphasis = coin(rng) ? PreEmphasis::midband() : PreEmphasis::first_order(0.9 + 0.09 * unit(rng));
  c.frontend.gammatone.f_lo = 50.0 * unit(rng);
  c.frontend.gammatone.align_phase = coin(rng);
  c.frontend.envelope.lowpass_hz = 20.0 + 40.0 * unit(rng);
  c.ica.contrast = static_cast<Contrast>(rng() % 3);
  c.ica.tol = 1e-6 * (1.0 + unit(rng));
  c.policy.top_p = 0.05 + 0.2 * unit(rng);
  c.mfcc.cepstral_mean_norm = coin(rng);
  c.mfcc.lifter = static_cast<int>(rng() % 30);
  c.model.n_states = 1 + static_cast<int>(rng() % 20);
  c.model.mixtures = 1 + static_cast<int>(rng() % 8);
  c.model.initial_self_loop = 0.1 + 0.8 * unit(rng);
  c.training.condition = coin(rng) ? "clean" : "multicondition";
  c.training.snr_db = coin(rng) ? kCleanSnr : 40.0 * unit(rng) - 5.0;
  c.evaluation.snrs = {-5.0 + unit(rng), 20.0, kCleanSnr};
  c.evaluation.noises = {"volvo", "destroyerengine"};
  return c;
}

TEST(Config, JsonRoundTripIsIdentity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_config(rng);
    const auto text = to_json(c).dump();
    EXPECT_EQ(config_from_json(nlohmann::json::parse(text)), c) << text;
  }
  for (const auto& name : preset_names()) EXPECT_EQ(config_from_json(to_json(preset(name))), preset(name));
}

TEST(Config, HashTracksContent) {
  const auto a = preset("sparse-exp2");
  auto b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.model.mixtures = 7;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, SparsePresetEchoesGeometry) {
  const auto j = to_json(preset("sparse-exp2"));
  ASSERT_EQ(j["hierarchy"].size(), 3u);
  EXPECT_EQ(j["hierarchy"][0]["components"], 64);
  EXPECT_EQ(j["hierarchy"][1]["components"], 128);
  EXPECT_EQ(j["hierarchy"][2]["components"], 256);
  EXPECT_EQ(j["model"]["n_states"], 16);
  EXPECT_EQ(j["model"]["mixtures"], 8);
  EXPECT_EQ(j["model"]["iterations"], 50);
  EXPECT_EQ(j["policy"], "top_p=0.1");
  const auto g = SparseSystem::geometry(preset("sparse-exp2"));
  EXPECT_EQ(g.total_frame_dim(), 576);
  EXPECT_EQ(g.top_channels(), 64);
  EXPECT_DOUBLE_EQ(g.top_ms(), 160.0);
}

TEST(Config, MfccPresetEchoesBaseline) {
  const auto c = preset("mfcc-baseline");
  const auto j = to_json(c);
  EXPECT_EQ(j["system"], "mfcc");
  EXPECT_EQ(j["model"]["n_states"], 16);
  EXPECT_EQ(j["model"]["mixtures"], 4);
  EXPECT_EQ(MfccSystem::feature_dim(c.mfcc), 39);
}

TEST(Config, Exp1PresetGeometry) {
  const auto g = SparseSystem::geometry(preset("sparse-exp1"));
  EXPECT_EQ(g.top_channels(), 64);
  EXPECT_DOUBLE_EQ(g.top_ms(), 360.0);
}

TEST(Config, InvalidSettingsAreUsageErrors) {
  EXPECT_THROW(preset("nope"), ConfigError);
  auto j = to_json(preset("sparse-exp2"));
  j["model"]["n_states"] = 0;
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = to_json(preset("sparse-exp2"));
  j["model"]["mixtures"] = "eight";
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = to_json(preset("sparse-exp2"));
  j["hierarchy"][0]["window_channels"] = 65;
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = to_json(preset("sparse-exp2"));
  j["training"]["condition"] = "dirty";
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = to_json(preset("sparse-exp2"));
  j["ica"]["contrast"] = "tanh";
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Config, FileMayStartFromPreset) {
  const auto path = fs::temp_directory_path() / "sparsehear_cfg_test.json";
  {
    std::ofstream out(path);
    out << R"({"preset": "mfcc-baseline", "seed": 9, "model": {"iterations": 3}})";
  }
  const auto c = load_config(path.string());
  auto expect = preset("mfcc-baseline");
  expect.seed = 9;
  expect.model.iterations = 3;
  EXPECT_EQ(c, expect);
  EXPECT_EQ(load_config("sparse-exp1"), preset("sparse-exp1"));
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
  fs::remove(path);
}

Corpus tiny_corpus() {
  SynthCorpusConfig sc;
  sc.classes = 3;
  sc.speakers = 2;
  sc.train_per_class = 4;
  sc.test_per_class = 2;
  sc.seed = 5;
  return corpus_from_synth(synthesize_corpus(sc));
}

ExperimentConfig tiny_sparse() {
  ExperimentConfig c = preset("sparse-exp2");
  c.name = "tiny-sparse";
  c.hierarchy = {{16, 16, 10, 1, 1, 0.0, 0.0, 3000, 16}, {16, 0, 0, 2, 2, 0.0, 0.0, 3000, 16}};
  c.ica.max_iter = 100;
  c.model.n_states = 3;
  c.model.mixtures = 2;
  c.model.iterations = 3;
  c.evaluation.noises = {"white"};
  c.evaluation.snrs = {10.0, kCleanSnr};
  return c;
}

ExperimentConfig tiny_mfcc() {
  ExperimentConfig c = preset("mfcc-baseline");
  c.name = "tiny-mfcc";
  c.model.n_states = 3;
  c.model.mixtures = 2;
  c.model.iterations = 3;
  c.evaluation.noises = {"white"};
  c.evaluation.snrs = {10.0, kCleanSnr};
  return c;
}

class Quiet : public ::testing::Test {
 protected:
  void SetUp() override { warning_stream() = &sink_; }
  void TearDown() override { warning_stream() = &std::cerr; }
  std::ostringstream sink_;
};

using Pipeline = Quiet;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

TEST_F(Pipeline, SparseRunIsDeterministic) {
  const auto corpus = tiny_corpus();
  const auto a = run_pipeline(tiny_sparse(), corpus);
  const auto b = run_pipeline(tiny_sparse(), corpus);
  EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
  EXPECT_EQ(a.report.extra["config_hash"], config_hash(tiny_sparse()));
  EXPECT_EQ(a.report.extra["seed"], tiny_sparse().seed);
  ASSERT_EQ(a.report.cells.size(), 2u);
  for (const auto& cell : a.report.cells) {
    EXPECT_EQ(cell.total, corpus.test.size());
    std::size_t trace = 0;
    for (std::size_t k = 0; k < cell.confusion.size(); ++k) trace += cell.confusion[k][k];
    EXPECT_EQ(trace, cell.correct);
  }
  EXPECT_TRUE(a.cache_hits.empty());
}

TEST_F(Pipeline, CachedRerunEqualsColdRun) {
  const auto corpus = tiny_corpus();
  const auto cache = fresh_dir("sparsehear_cache_test");
  const auto cold_dir = fresh_dir("sparsehear_cold_out");
  const auto warm_dir = fresh_dir("sparsehear_warm_out");
  const auto uncached = run_pipeline(tiny_sparse(), corpus);
  const auto cold = run_pipeline(tiny_sparse(), corpus, {cache, cold_dir});
  const auto warm = run_pipeline(tiny_sparse(), corpus, {cache, warm_dir});
  EXPECT_TRUE(cold.cache_hits.empty());
  EXPECT_EQ(warm.cache_hits, (std::vector<std::string>{"train-dict", "train-model", "evaluate"}));
  for (const char* f : {"config.json", "dictionary.dict", "models.whmm", "report.json", "report.csv",
                        "models.whmm.meta.json"}) {
    ASSERT_TRUE(fs::exists(cold_dir / f)) << f;
    EXPECT_EQ(slurp(cold_dir / f), slurp(warm_dir / f)) << f;
  }
  EXPECT_EQ(uncached.report.to_json().dump(), warm.report.to_json().dump());
  const auto meta = nlohmann::json::parse(slurp(cold_dir / "dictionary.dict.meta.json"));
  EXPECT_EQ(meta["config_hash"], config_hash(tiny_sparse()));
  EXPECT_EQ(meta["seed"], tiny_sparse().seed);

  // A model-only change reuses the dictionary but retrains the models.
  auto changed = tiny_sparse();
  changed.model.iterations = 2;
  const auto partial = run_pipeline(changed, corpus, {cache, {}});
  EXPECT_EQ(partial.cache_hits, (std::vector<std::string>{"train-dict"}));

  // The cached system classifies exactly like the one that was just trained.
  for (const auto& u : corpus.test) {
    EXPECT_EQ(cold.system->recognize(u.audio).scores, warm.system->recognize(u.audio).scores);
  }
  fs::remove_all(cache);
  fs::remove_all(cold_dir);
  fs::remove_all(warm_dir);
}

TEST_F(Pipeline, MfccRunAndCache) {
  const auto corpus = tiny_corpus();
  const auto cache = fresh_dir("sparsehear_mfcc_cache_test");
  const auto cold = run_pipeline(tiny_mfcc(), corpus, {cache, {}});
  const auto warm = run_pipeline(tiny_mfcc(), corpus, {cache, {}});
  EXPECT_EQ(warm.cache_hits, (std::vector<std::string>{"train-model", "evaluate"}));
  EXPECT_EQ(cold.report.to_json().dump(), warm.report.to_json().dump());
  EXPECT_EQ(cold.system->system(), "mfcc");
  EXPECT_EQ(cold.system->vocabulary(), corpus.vocabulary());
  fs::remove_all(cache);
}

TEST_F(Pipeline, MulticonditionMixesEveryTrainingFile) {
  const auto corpus = tiny_corpus();
  auto cfg = tiny_mfcc();
  cfg.training.condition = "multicondition";
  cfg.training.noises = {"white"};
  const auto a = training_audio(cfg, corpus);
  const auto b = training_audio(cfg, corpus);
  ASSERT_EQ(a.size(), corpus.train.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].audio.samples, b[k].audio.samples);
    EXPECT_NE(a[k].audio.samples, corpus.train[k].audio.samples);
    EXPECT_EQ(a[k].label, corpus.train[k].label);
  }
  cfg.training.condition = "clean";
  EXPECT_EQ(training_audio(cfg, corpus)[0].audio.samples, corpus.train[0].audio.samples);
}

TEST_F(Pipeline, FailuresNameTheStage) {
  const auto corpus = tiny_corpus();
  auto cfg = tiny_sparse();
  cfg.hierarchy[0].max_examples = 4;
  try {
    run_pipeline(cfg, corpus);
    FAIL() << "expected a train-dict failure";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("stage train-dict"), std::string::npos) << e.what();
    EXPECT_EQ(e.code(), ExitCode::kData);
  }
  Corpus empty_test = corpus;
  empty_test.test.clear();
  EXPECT_THROW(run_pipeline(tiny_mfcc(), empty_test), InvalidInput);
}

TEST_F(Pipeline, ProfileCoversEveryStage) {
  const auto corpus = tiny_corpus();
  const auto r = run_pipeline(tiny_sparse(), corpus);
  std::vector<const AudioSignal*> audio;
  for (const auto& u : corpus.test) audio.push_back(&u.audio);
  const auto prof = profile_system(*r.system, audio);
  ASSERT_EQ(prof.stages.size(), 4u);
  EXPECT_EQ(prof.stages[0].stage, "cochleogram");
  EXPECT_EQ(prof.stages[3].stage, "decoding");
  double total = 0.0, seconds = 0.0;
  for (const auto& s : prof.stages) total += s.seconds;
  for (const auto* a : audio) seconds += a->duration();
  EXPECT_DOUBLE_EQ(prof.global.seconds, total);
  EXPECT_DOUBLE_EQ(prof.audio_seconds, seconds);
  EXPECT_GT(prof.global.factor, 0.0);
}

TEST(CorpusHash, SensitiveToSamplesAndLabels) {
  auto corpus = tiny_corpus();
  const auto h = corpus_hash(corpus.train);
  EXPECT_EQ(h, corpus_hash(tiny_corpus().train));
  corpus.train[0].audio.samples[10] += 1e-9;
  EXPECT_NE(h, corpus_hash(corpus.train));
  corpus = tiny_corpus();
  corpus.train[1].label = "other";
  EXPECT_NE(h, corpus_hash(corpus.train));
}

}  // namespace
}  // namespace sparsehear
