// Copyright 2026 The Gestural Chart Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gce/gce.hpp"
#include "scenario.hpp"

#ifndef GCE_GOLDEN_DIR
#define GCE_GOLDEN_DIR "tests/golden"
#endif

namespace gce::testing {

/// Charts at hand-picked floor positions with smooth periodic series.
inline std::shared_ptr<const Dataset> small_dataset(const std::vector<std::pair<std::string, Vec2>>& places,
                                                    int events = 150, int variables = 5) {
  Dataset d;
  for (int v = 0; v < variables; ++v) d.variable_names.push_back("v" + std::to_string(v));
  for (int t = 0; t < events; ++t) d.timestamps.push_back(iso_day(t));
  int k = 0;
  for (const auto& [id, pos] : places) {
    Entity e;
    e.id = id;
    e.name = id;
    e.position = pos;
    for (int v = 0; v < variables; ++v) {
      std::vector<double> s;
      for (int t = 0; t < events; ++t) s.push_back(50.0 + 30.0 * std::sin(0.125 * t + v + k) + 2.0 * v);
      e.series.push_back(std::move(s));
    }
    d.entities.push_back(std::move(e));
    ++k;
  }
  return std::make_shared<const Dataset>(std::move(d));
}

/// The user starts 1.2 m east of the easternmost chart, facing it.
inline EngineConfig near_config() {
  EngineConfig cfg;
  cfg.start_border_m = 1.2;
  return cfg;
}

struct Replayed {
  std::vector<InteractionEvent> events;
  EngineState state;
  std::vector<Observation> observations;
};

inline Replayed run(const std::vector<TraceRecord>& trace, std::shared_ptr<const Dataset> dataset, ReplayOptions options) {
  SessionRunner runner(std::move(dataset), options);
  Replayed out;
  for (const auto& r : trace) {
    auto o = runner.feed(r);
    out.observations.push_back(o.observation);
    for (auto& e : o.events) out.events.push_back(std::move(e));
  }
  out.state = runner.engine();
  return out;
}

inline Replayed run(const ScriptBuilder& b, ReplayOptions options = {}) {
  options.engine = b.cfg();
  return run(b.records, b.dataset_ptr(), options);
}

inline int count(const std::vector<InteractionEvent>& events, EventKind kind) {
  int n = 0;
  for (const auto& e : events) n += e.kind == kind ? 1 : 0;
  return n;
}

inline std::vector<EventKind> kinds(const std::vector<InteractionEvent>& events) {
  std::vector<EventKind> out;
  for (const auto& e : events) out.push_back(e.kind);
  return out;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path golden_dir() { return GCE_GOLDEN_DIR; }

inline std::shared_ptr<const Dataset> golden_dataset() {
  return std::make_shared<const Dataset>(load_dataset(read_text(golden_dir() / "dataset.json")));
}

inline std::vector<TraceRecord> golden_trace() {
  std::istringstream in(read_text(golden_dir() / "trace.jsonl"));
  return read_trace(in);
}

inline std::string log_text(const std::vector<LogRecord>& log) {
  std::ostringstream out;
  write_log(out, log);
  return out.str();
}

}  // namespace gce::testing
