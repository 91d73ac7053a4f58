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

// Command-line front end: dictionary training, feature extraction, model
// training, recognition, evaluation, profiling and end-to-end runs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparsehear/harness/synth_corpus.hpp"
#include "sparsehear/pipeline/config.hpp"
#include "sparsehear/pipeline/run.hpp"
#include "sparsehear/pipeline/systems.hpp"

namespace fs = std::filesystem;
using namespace sparsehear;

namespace {

bool is_manifest(const std::string& path) { return fs::path(path).extension() == ".json"; }

DictionaryHierarchy load_dictionary(const std::string& path) {
  auto in = io::open_in(path);
  return read_hierarchy(in);
}

void save_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_snrs(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(parse_snr(s));
  if (out.empty()) throw ConfigError("--snr: empty list");
  return out;
}

// Training audio of a manifest, mixed according to the config.
std::vector<LabeledAudio> training_split(const ExperimentConfig& cfg, const CorpusManifest& m) {
  const auto corpus = load_corpus(m);
  if (corpus.train.empty()) throw InvalidInput("manifest has no training entries");
  return training_audio(cfg, corpus);
}

// Sparse or MFCC system from a model file; sparse models need the dictionary.
std::unique_ptr<WordRecognizer> load_system(const ExperimentConfig& base, const std::string& models,
                                            const std::string& dict) {
  auto in = io::open_in(models);
  const auto tag = peek_model_tag(in);
  ExperimentConfig cfg = base;
  if (tag == BernoulliMixture::kTag) {
    if (dict.empty()) throw ConfigError("Bernoulli models need --dict");
    auto d = load_dictionary(dict);
    cfg.system = "sparse";
    return std::make_unique<SparseSystem>(cfg, std::move(d), read_recognizer<BernoulliMixture>(in));
  }
  if (tag == GaussianMixture::kTag) {
    cfg.system = "mfcc";
    return std::make_unique<MfccSystem>(cfg, read_recognizer<GaussianMixture>(in));
  }
  throw FormatError("WHMM: unknown emission tag " + std::to_string(tag));
}

struct Options {
  std::string config = "sparse-exp2";
  std::string corpus, out, dict, models, in, policy, noise = "babble,white", snr = "-5,0,10,20,40,clean", cache;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool mfcc_features = false;
  bool viterbi = false;
  SynthCorpusConfig synth;
};

ExperimentConfig config_of(const Options& o) {
  auto cfg = load_config(o.config);
  if (o.seed_set) cfg.seed = o.seed;
  if (!o.policy.empty()) cfg.policy = BinarizePolicy::parse(o.policy);
  return cfg;
}

int cmd_train_dict(const Options& o) {
  const auto cfg = config_of(o);
  const auto train = training_split(cfg, read_manifest(o.corpus));
  const auto result = SparseSystem::train_dictionary(cfg, train);
  {
    auto out = io::open_out(o.out);
    write_hierarchy(out, result.hierarchy);
  }
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& r : result.reports) {
    levels.push_back({{"level", r.level},
                      {"examples", r.used},
                      {"available", r.available},
                      {"input_dim", r.input_dim},
                      {"whitened_dim", r.whitened_dim},
                      {"converged", r.converged},
                      {"iterations", r.iterations}});
  }
  save_text(o.out + ".meta.json", nlohmann::json{{"stage", "dictionary"},
                                                 {"config", cfg.name},
                                                 {"config_hash", config_hash(cfg)},
                                                 {"seed", cfg.seed},
                                                 {"levels", levels}}
                                          .dump(1) +
                                      "\n");
  std::cout << "wrote " << o.out << " (" << result.hierarchy.depth() << " levels, frame dim "
            << result.hierarchy.geometry.total_frame_dim() << ")\n";
  return 0;
}

int cmd_extract(const Options& o) {
  const auto cfg = config_of(o);
  std::optional<DictionaryHierarchy> dict;
  if (!o.mfcc_features) {
    if (o.dict.empty()) throw ConfigError("extract needs --dict (or --mfcc)");
    dict = load_dictionary(o.dict);
  }
  std::vector<std::pair<std::string, AudioSignal>> inputs;
  if (is_manifest(o.in)) {
    const auto m = read_manifest(o.in);
    for (const auto& e : m.entries) inputs.emplace_back(fs::path(e.path).stem().string(), load_entry(m, e));
  } else {
    inputs.emplace_back(fs::path(o.in).stem().string(), to_default_rate(read_wav(o.in)));
  }
  fs::create_directories(o.out);
  for (const auto& [name, audio] : inputs) {
    if (dict) {
      auto out = io::open_out((fs::path(o.out) / (name + ".bfv")).string());
      write_binary_features(out, SparseSystem::features(cfg, *dict, audio));
    } else {
      auto out = io::open_out((fs::path(o.out) / (name + ".mfc")).string());
      write_mfcc(out, mfcc(audio, cfg.mfcc));
    }
  }
  std::cout << "extracted " << inputs.size() << " file(s) into " << o.out << "\n";
  return 0;
}

int cmd_train_model(const Options& o) {
  const auto cfg = config_of(o);
  const auto train = training_split(cfg, read_manifest(o.corpus));
  std::vector<WordTrainingReport> reports;
  auto out = io::open_out(o.out);
  if (cfg.system == "sparse") {
    if (o.dict.empty()) throw ConfigError("sparse models need --dict");
    write_recognizer(out, SparseSystem::train_models(cfg, load_dictionary(o.dict), train, &reports));
  } else {
    write_recognizer(out, MfccSystem::train_models(cfg, train, &reports));
  }
  nlohmann::json words = nlohmann::json::array();
  for (const auto& r : reports) {
    words.push_back({{"label", r.label},
                     {"sequences", r.sequences},
                     {"skipped", r.skipped},
                     {"final_log_likelihood", r.log_likelihoods.empty() ? 0.0 : r.log_likelihoods.back()}});
  }
  save_text(o.out + ".meta.json", nlohmann::json{{"stage", "models"},
                                                 {"config", cfg.name},
                                                 {"config_hash", config_hash(cfg)},
                                                 {"seed", cfg.seed},
                                                 {"words", words}}
                                          .dump(1) +
                                      "\n");
  std::cout << "wrote " << o.out << " (" << reports.size() << " words)\n";
  return 0;
}

int cmd_recognize(const Options& o) {
  auto in = io::open_in(o.models);
  const auto tag = peek_model_tag(in);
  auto feats = io::open_in(o.in);
  RecognitionResult r;
  std::vector<std::string> labels;
  if (tag == BernoulliMixture::kTag) {
    const auto rec = read_recognizer<BernoulliMixture>(in);
    const auto seq = read_binary_features(feats);
    if (static_cast<int>(seq.dim) != rec.dim()) {
      throw ShapeError("features have dimension " + std::to_string(seq.dim) + ", models expect " +
                       std::to_string(rec.dim()));
    }
    r = rec.recognize(seq.frames, o.viterbi);
    for (const auto& w : rec.words()) labels.push_back(w.label());
  } else if (tag == GaussianMixture::kTag) {
    const auto rec = read_recognizer<GaussianMixture>(in);
    const auto seq = read_mfcc(feats);
    if (!seq.frames.empty() && seq.frames.front().size() != rec.dim()) throw ShapeError("MFCC dimension mismatch");
    r = rec.recognize(seq.frames, o.viterbi);
    for (const auto& w : rec.words()) labels.push_back(w.label());
  } else {
    throw FormatError("WHMM: unknown emission tag " + std::to_string(tag));
  }
  nlohmann::json scores = nlohmann::json::object();
  for (std::size_t k = 0; k < labels.size(); ++k) scores[labels[k]] = r.scores[k];
  std::cout << nlohmann::json{{"label", r.label}, {"index", r.index}, {"scores", scores}}.dump(1) << "\n";
  return 0;
}

int cmd_evaluate(const Options& o) {
  auto cfg = config_of(o);
  cfg.evaluation.noises = split_list(o.noise);
  cfg.evaluation.snrs = parse_snrs(o.snr);
  const auto system = load_system(cfg, o.models, o.dict);
  const auto corpus = load_corpus(read_manifest(o.corpus));
  auto report = evaluate_system(*system, cfg, corpus.test);
  report.extra = {{"config", cfg.name}, {"config_hash", config_hash(cfg)}, {"seed", cfg.seed}, {"models", o.models}};
  save_text(o.out, report.to_json().dump(1) + "\n");
  save_text(fs::path(o.out).replace_extension(".csv"), report.to_csv());
  std::cout << report.to_csv();
  return 0;
}

int cmd_profile(const Options& o) {
  const auto cfg = config_of(o);
  const auto system = load_system(cfg, o.models, o.dict);
  const auto corpus = load_corpus(read_manifest(o.corpus));
  std::vector<const AudioSignal*> audio;
  for (const auto* split : {&corpus.test, &corpus.train})
    for (const auto& u : *split) audio.push_back(&u.audio);
  auto j = profile_system(*system, audio).to_json();
  j["system"] = system->system();
  if (!o.out.empty()) save_text(o.out, j.dump(1) + "\n");
  std::cout << j.dump(1) << "\n";
  return 0;
}

int cmd_synth(const Options& o) {
  const auto m = write_synth_corpus(o.out, o.synth);
  std::cout << "wrote " << m.entries.size() << " utterances and manifest.json into " << o.out << "\n";
  return 0;
}

int cmd_export_bases(const Options& o) {
  const auto hier = load_dictionary(o.dict);
  fs::create_directories(o.out);
  for (std::size_t h = 0; h < hier.depth(); ++h) {
    const auto& g = hier.geometry.level(h);
    nlohmann::json bases = nlohmann::json::array();
    for (int k = 0; k < g.components; ++k) {
      const Matrix patch = receptive_field(hier, h, Vector::Unit(g.components, k));
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index c = 0; c < patch.rows(); ++c) {
        std::vector<double> row(patch.cols());
        for (Eigen::Index t = 0; t < patch.cols(); ++t) row[t] = patch(c, t);
        rows.push_back(row);
      }
      bases.push_back(std::move(rows));
    }
    const nlohmann::json j{{"level", h},
                           {"channels", g.span_channels},
                           {"frames", g.span_frames},
                           {"frame_rate", hier.geometry.frame_rate()},
                           {"bases", bases}};
    save_text(fs::path(o.out) / ("level" + std::to_string(h) + ".json"), j.dump() + "\n");
  }
  std::cout << "exported " << hier.depth() << " level(s) into " << o.out << "\n";
  return 0;
}

int cmd_run(const Options& o) {
  const auto cfg = config_of(o);
  const auto corpus = load_corpus(read_manifest(o.corpus));
  const auto r = run_pipeline(cfg, corpus, {o.cache, o.out});
  std::cout << "config " << cfg.name << " hash " << r.config_hash;
  if (!r.cache_hits.empty()) {
    std::cout << " (cached:";
    for (const auto& s : r.cache_hits) std::cout << ' ' << s;
    std::cout << ')';
  }
  std::cout << "\n" << r.report.to_csv();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse hierarchical auditory features and isolated-word recognition"};
  app.require_subcommand(1);
  Options o;

  const auto add_config = [&](CLI::App* c) {
    c->add_option("--config", o.config, "preset name or JSON config file")->capture_default_str();
    c->add_option("--seed", o.seed, "override the config seed")->each([&](const std::string&) { o.seed_set = true; });
  };

  auto* train_dict = app.add_subcommand("train-dict", "learn the dictionary hierarchy by ICA");
  add_config(train_dict);
  train_dict->add_option("--corpus", o.corpus, "corpus manifest")->required();
  train_dict->add_option("--out", o.out, "dictionary file")->required();

  auto* extract = app.add_subcommand("extract", "write binary (or MFCC) feature files");
  add_config(extract);
  extract->add_option("--dict", o.dict, "dictionary file");
  extract->add_option("--in", o.in, "WAV file or manifest")->required();
  extract->add_option("--out", o.out, "output directory")->required();
  extract->add_option("--policy", o.policy, "binarization policy, e.g. top_p=0.1");
  extract->add_flag("--mfcc", o.mfcc_features, "extract 39-dim MFCCs instead");

  auto* train_model = app.add_subcommand("train-model", "train one HMM per word");
  add_config(train_model);
  train_model->add_option("--corpus", o.corpus, "corpus manifest")->required();
  train_model->add_option("--dict", o.dict, "dictionary file (sparse system)");
  train_model->add_option("--out", o.out, "model file")->required();

  auto* recognize = app.add_subcommand("recognize", "classify one feature file");
  recognize->add_option("--models", o.models, "model file")->required();
  recognize->add_option("--in", o.in, "feature file (.bfv or .mfc)")->required();
  recognize->add_flag("--viterbi", o.viterbi, "score with the best path instead of the forward sum");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "recognition rates over a noise/SNR grid");
  add_config(evaluate_cmd);
  evaluate_cmd->add_option("--models", o.models, "model file")->required();
  evaluate_cmd->add_option("--dict", o.dict, "dictionary file (sparse models)");
  evaluate_cmd->add_option("--manifest", o.corpus, "corpus manifest (test split is used)")->required();
  evaluate_cmd->add_option("--noise", o.noise, "comma-separated noises")->capture_default_str();
  evaluate_cmd->add_option("--snr", o.snr, "comma-separated SNRs in dB, or clean")->capture_default_str();
  evaluate_cmd->add_option("--out", o.out, "report JSON (CSV written alongside)")->required();

  auto* profile = app.add_subcommand("profile", "per-stage and global real-time factors");
  add_config(profile);
  profile->add_option("--models", o.models, "model file")->required();
  profile->add_option("--dict", o.dict, "dictionary file (sparse models)");
  profile->add_option("--manifest", o.corpus, "corpus manifest")->required();
  profile->add_option("--out", o.out, "report JSON");

  auto* synth = app.add_subcommand("synth-corpus", "write the synthetic pseudo-word corpus");
  synth->add_option("--out", o.out, "output directory")->required();
  synth->add_option("--classes", o.synth.classes)->capture_default_str();
  synth->add_option("--speakers", o.synth.speakers)->capture_default_str();
  synth->add_option("--train", o.synth.train_per_class, "training utterances per class")->capture_default_str();
  synth->add_option("--test", o.synth.test_per_class, "test utterances per class")->capture_default_str();
  synth->add_option("--seed", o.synth.seed)->capture_default_str();

  auto* export_bases = app.add_subcommand("export-bases", "dump bases as cochleogram-shaped matrices");
  export_bases->add_option("--dict", o.dict, "dictionary file")->required();
  export_bases->add_option("--out", o.out, "output directory")->required();

  auto* run = app.add_subcommand("run", "train-dict, extract, train-model and evaluate in one go");
  add_config(run);
  run->add_option("--corpus", o.corpus, "corpus manifest")->required();
  run->add_option("--cache", o.cache, "content-addressed cache directory");
  run->add_option("--out", o.out, "artifact directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (*train_dict) return cmd_train_dict(o);
    if (*extract) return cmd_extract(o);
    if (*train_model) return cmd_train_model(o);
    if (*recognize) return cmd_recognize(o);
    if (*evaluate_cmd) return cmd_evaluate(o);
    if (*profile) return cmd_profile(o);
    if (*synth) return cmd_synth(o);
    if (*export_bases) return cmd_export_bases(o);
    if (*run) return cmd_run(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  }
  return static_cast<int>(ExitCode::kUsage);
}
