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

#include <chrono>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparsehear/core/error.hpp"

namespace sparsehear {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RealtimeEntry {
  std::string stage;
  double seconds = 0.0;
  double factor = 0.0;       // audio duration / processing time
  bool lower_bound = false;  // processing time below the clock resolution
};

struct RealtimeReport {
  double audio_seconds = 0.0;
  std::vector<RealtimeEntry> stages;
  RealtimeEntry global;

  // A factor of at least one means processing keeps up with the audio.
  bool realtime() const { return global.factor >= 1.0; }

  nlohmann::json to_json() const {
    auto entry = [](const RealtimeEntry& e) {
      return nlohmann::json{{"stage", e.stage}, {"seconds", e.seconds}, {"rtf", e.factor}, {"lower_bound", e.lower_bound}};
    };
    nlohmann::json s = nlohmann::json::array();
    for (const auto& e : stages) s.push_back(entry(e));
    return {{"audio_seconds", audio_seconds}, {"stages", s}, {"global", entry(global)}, {"realtime", realtime()}};
  }
};

// Real-time factor per stage and for the summed stages. Stages faster than
// `resolution` report the bound audio/resolution and are flagged.
inline RealtimeReport realtime_factor(const std::vector<StageTiming>& timings, double audio_seconds,
                                      double resolution = 1e-6) {
  if (!(audio_seconds > 0.0)) throw InvalidInput("realtime_factor: audio duration must be positive");
  if (timings.empty()) throw InvalidInput("realtime_factor: no stage timings");
  const auto make = [&](const std::string& name, double sec) {
    if (sec < 0.0) throw InvalidInput("realtime_factor: negative time for stage " + name);
    const bool bound = sec < resolution;
    return RealtimeEntry{name, sec, audio_seconds / (bound ? resolution : sec), bound};
  };
  RealtimeReport r;
  r.audio_seconds = audio_seconds;
  double total = 0.0;
  for (const auto& t : timings) {
    r.stages.push_back(make(t.stage, t.seconds));
    total += t.seconds;
  }
  r.global = make("global", total);
  return r;
}

// Accumulates wall-clock time per named stage.
class StageClock {
 public:
  template <class F>
  decltype(auto) time(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Stop {
      StageClock* self;
      const std::string& stage;
      std::chrono::steady_clock::time_point start;
      ~Stop() { self->add(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()); }
    } stop{this, stage, start};
    return f();
  }

  void add(const std::string& stage, double seconds) {
    for (auto& t : timings_) {
      if (t.stage == stage) {
        t.seconds += seconds;
        return;
      }
    }
    timings_.push_back({stage, seconds});
  }

  const std::vector<StageTiming>& timings() const { return timings_; }

 private:
  std::vector<StageTiming> timings_;
};

}  // namespace sparsehear
