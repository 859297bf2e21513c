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

// Session protocol, independent of the transport. Every message is one JSON
// object with a "type" tag.
//
//   client -> server   Hello{protocol_version}
//                      LoadDataset{name} | LoadDataset{inline: <dataset>}
//                      Input{record: <trace record>}
//                      SnapshotRequest{}
//   server -> client   Welcome{session_id, protocol_version, dataset}
//                      StateDelta{t_ms, charts?, viewpoint?, paused?, hands?}
//                      Event{record: <log record>}
//                      Snapshot{state}
//                      Error{code, message}
//
// A StateDelta lists only the charts whose projection changed and only the
// world fields that changed. Folding every delta into the snapshot taken at
// Welcome (or at LoadDataset) yields the current Snapshot.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gce/engine.hpp"
#include "gce/session_io.hpp"

namespace gce {

inline constexpr int kProtocolVersion = 1;

using DatasetResolver = std::function<std::shared_ptr<const Dataset>(const std::string& name)>;

struct ServiceConfig {
  unsigned short port = 8765;
  std::shared_ptr<const Dataset> dataset;
  ReplayOptions options;
  std::optional<std::string> log_dir;
  DatasetResolver resolve;  // LoadDataset{name}; defaults to gen:<seed> only
};

/// "gen:<seed>" builds a default-size synthetic dataset.
inline std::shared_ptr<const Dataset> resolve_generated(const std::string& name) {
  if (name.rfind("gen:", 0) != 0) return nullptr;
  GenParams p;
  try {
    p.seed = std::stoull(name.substr(4));
  } catch (const std::exception&) {
    return nullptr;
  }
  return std::make_shared<const Dataset>(generate_dataset(p));
}

inline Json viewpoint_json(const Viewpoint& vp) {
  return Json{{"position", {detail::round4(vp.position.x()), detail::round4(vp.position.y()), detail::round4(vp.position.z())}},
              {"yaw_deg", detail::round4(rad_to_deg(vp.yaw))}};
}

inline Json chart_view_json(const ChartView& v) {
  auto window = [](const std::optional<EventWindow>& w) { return w ? detail::window_json(*w) : Json(nullptr); };
  Json j;
  j["id"] = v.id;
  j["mode"] = std::string(to_string(v.mode));
  j["window"] = detail::window_json(v.window);
  j["slice"] = v.slice;
  j["arrangement"] = v.arrangement;
  j["yaw_deg"] = v.yaw_deg;
  j["selected_range"] = window(v.selected_range);
  j["preview_range"] = window(v.preview_range);
  j["outline"] = v.outline;
  j["outside_semitransparent"] = v.outside_semitransparent;
  j["dragged_variable"] = v.dragged_variable ? Json(*v.dragged_variable) : Json(nullptr);
  j["drag_connected"] = v.drag_connected;
  return j;
}

inline Json hands_json(const HandView& h) {
  return Json{{"left_tracked", h.left_tracked}, {"right_tracked", h.right_tracked}, {"semitransparent", h.semitransparent}};
}

inline Json world_json(const WorldView& w) {
  Json charts = Json::array();
  for (const auto& [_, c] : w.charts) charts.push_back(chart_view_json(c));
  return Json{{"t_ms", w.t_ms},
              {"charts", std::move(charts)},
              {"viewpoint", viewpoint_json(w.viewpoint)},
              {"paused", w.paused},
              {"hands", hands_json(w.hands)}};
}

/// Delta between two projections; charts compared by their serialized form.
inline Json delta_json(const WorldView& before, const WorldView& after) {
  Json d{{"type", "StateDelta"}, {"t_ms", after.t_ms}};
  Json charts = Json::array();
  for (const auto& [id, c] : after.charts) {
    auto it = before.charts.find(id);
    if (it == before.charts.end() || !(it->second == c)) charts.push_back(chart_view_json(c));
  }
  if (!charts.empty()) d["charts"] = std::move(charts);
  const Json vb = viewpoint_json(before.viewpoint);
  const Json va = viewpoint_json(after.viewpoint);
  if (vb != va) d["viewpoint"] = va;
  if (before.paused != after.paused) d["paused"] = after.paused;
  if (!(before.hands == after.hands)) d["hands"] = hands_json(after.hands);
  return d;
}

/// Applies a StateDelta message to a snapshot state (world_json form).
inline void fold_delta(Json& state, const Json& delta) {
  state["t_ms"] = delta.at("t_ms");
  if (auto it = delta.find("charts"); it != delta.end()) {
    for (const auto& c : *it) {
      bool replaced = false;
      for (auto& existing : state["charts"]) {
        if (existing["id"] == c["id"]) {
          existing = c;
          replaced = true;
        }
      }
      if (!replaced) state["charts"].push_back(c);
    }
  }
  for (const char* key : {"viewpoint", "paused", "hands"}) {
    if (auto it = delta.find(key); it != delta.end()) state[key] = *it;
  }
}

inline Json error_message(std::string_view code, const std::string& message) {
  return Json{{"type", "Error"}, {"code", code}, {"message", message}};
}

inline Json dataset_summary(const Dataset& d) {
  return Json{{"entities", d.entities.size()},
              {"variables", d.variable_names},
              {"events", d.timestamps.size()},
              {"first", d.timestamps.front()},
              {"last", d.timestamps.back()}};
}

/// One client session: strictly sequential, owns its engine.
class Session {
 public:
  Session(std::string session_id, const ServiceConfig& config, std::ostream* log_sink = nullptr)
      : id_(std::move(session_id)), config_(config), log_(log_sink) {}

  const std::string& id() const { return id_; }
  bool welcomed() const { return runner_.has_value(); }
  const SessionRunner* runner() const { return runner_ ? &*runner_ : nullptr; }

  std::vector<Json> handle_message(const Json& msg) {
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
      return {error_message("bad_message", "message must be an object with a string \"type\"")};
    }
    const std::string type = msg["type"];
    try {
      if (type == "Hello") return hello(msg);
      if (type != "LoadDataset" && type != "Input" && type != "SnapshotRequest") {
        return {error_message("unsupported", "unknown message type " + type)};
      }
      if (!welcomed()) return {error_message("protocol", type + " before Hello")};
      if (type == "LoadDataset") return load(msg);
      if (type == "Input") return input(msg);
      return {snapshot()};
    } catch (const EngineError& e) {
      return {error_message(e.code() == EngineErrc::NonMonotonicTime ? "non_monotonic" : "engine", e.what())};
    } catch (const IoError& e) {
      return {error_message("bad_message", e.what())};
    } catch (const nlohmann::json::exception& e) {
      return {error_message("bad_message", e.what())};
    }
  }

  std::vector<Json> handle_text(std::string_view text) {
    Json msg;
    try {
      msg = Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
      return {error_message("bad_message", e.what())};
    }
    return handle_message(msg);
  }

  Json snapshot() const {
    return Json{{"type", "Snapshot"}, {"session_id", id_}, {"state", world_json(world_view(runner_->engine()))}};
  }

 private:
  std::vector<Json> hello(const Json& msg) {
    if (welcomed()) return {error_message("protocol", "duplicate Hello")};
    const auto version = msg.find("protocol_version");
    if (version == msg.end() || !version->is_number_integer()) {
      return {error_message("bad_message", "Hello needs an integer protocol_version")};
    }
    if (version->get<int>() != kProtocolVersion) {
      return {error_message("version_mismatch", "server speaks protocol " + std::to_string(kProtocolVersion))};
    }
    if (!config_.dataset) return {error_message("protocol", "no dataset configured")};
    start(config_.dataset);
    return {Json{{"type", "Welcome"},
                 {"session_id", id_},
                 {"protocol_version", kProtocolVersion},
                 {"dataset", dataset_summary(*config_.dataset)}}};
  }

  std::vector<Json> load(const Json& msg) {
    std::shared_ptr<const Dataset> dataset;
    if (auto it = msg.find("inline"); it != msg.end()) {
      dataset = std::make_shared<const Dataset>(load_dataset(it->dump()));
    } else if (auto name = msg.find("name"); name != msg.end() && name->is_string()) {
      const std::string n = *name;
      dataset = config_.resolve ? config_.resolve(n) : resolve_generated(n);
      if (!dataset) return {error_message("bad_message", "unknown dataset " + n)};
    } else {
      return {error_message("bad_message", "LoadDataset needs name or inline")};
    }
    start(dataset);
    return {snapshot()};
  }

  std::vector<Json> input(const Json& msg) {
    auto rec = msg.find("record");
    if (rec == msg.end()) return {error_message("bad_message", "Input needs a record")};
    const TraceRecord record = parse_trace(rec->dump(), "record");
    const WorldView before = world_view(runner_->engine());
    auto out = runner_->feed(record);
    std::vector<Json> replies;
    replies.push_back(delta_json(before, world_view(runner_->engine())));
    for (const auto& r : out.records) {
      if (log_) *log_ << serialize_log(r) << '\n';
      replies.push_back(Json{{"type", "Event"}, {"record", log_json(r)}});
    }
    if (log_) log_->flush();
    return replies;
  }

  void start(std::shared_ptr<const Dataset> dataset) {
    ReplayOptions options = config_.options;
    options.session_id = id_;
    runner_.emplace(std::move(dataset), options);
  }

  std::string id_;
  const ServiceConfig& config_;
  std::ostream* log_;
  std::optional<SessionRunner> runner_;
};

}  // namespace gce
