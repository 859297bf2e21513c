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

// File formats and session plumbing: dataset JSON, line-delimited traces and
// event logs, the seeded dataset generator, replay and log statistics.
//
// Traces and logs are one JSON object per '\n'-terminated line with a fixed
// key order. Doubles are written in shortest round-trip form.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gce/chart.hpp"
#include "gce/engine.hpp"
#include "gce/events.hpp"
#include "gce/hand.hpp"
#include "gce/splitmix.hpp"
#include "gce/tracker.hpp"

namespace gce {

using Json = nlohmann::ordered_json;

enum class IoErrc { ParseError, SchemaError, LengthMismatch, InvalidParams, NonMonotonicTrace, UnorderedLog };

inline constexpr std::string_view to_string(IoErrc e) {
  switch (e) {
    case IoErrc::ParseError: return "ParseError";
    case IoErrc::SchemaError: return "SchemaError";
    case IoErrc::LengthMismatch: return "LengthMismatch";
    case IoErrc::InvalidParams: return "InvalidParams";
    case IoErrc::NonMonotonicTrace: return "NonMonotonicTrace";
    case IoErrc::UnorderedLog: return "UnorderedLog";
  }
  return "IoError";
}

class IoError : public std::runtime_error {
 public:
  IoError(IoErrc code, std::string path, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + (path.empty() ? "" : " at " + path) + ": " + message),
        code_(code),
        path_(std::move(path)) {}
  IoErrc code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  IoErrc code_;
  std::string path_;
};

namespace detail {

inline const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw IoError(IoErrc::SchemaError, path, "expected object");
  auto it = j.find(key);
  if (it == j.end()) throw IoError(IoErrc::SchemaError, path + "." + key, "missing");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw IoError(IoErrc::SchemaError, path, "expected number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw IoError(IoErrc::SchemaError, path, "non-finite");
  return v;
}

inline std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) throw IoError(IoErrc::SchemaError, path, "expected string");
  return j.get<std::string>();
}

inline const Json& array(const Json& j, const std::string& path, std::optional<std::size_t> size = std::nullopt) {
  if (!j.is_array()) throw IoError(IoErrc::SchemaError, path, "expected array");
  if (size && j.size() != *size) {
    throw IoError(IoErrc::SchemaError, path, "expected " + std::to_string(*size) + " elements");
  }
  return j;
}

inline Vec3 vec3(const Json& j, const std::string& path) {
  array(j, path, 3);
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

inline Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Json parse_json(std::string_view bytes, const std::string& where) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(IoErrc::ParseError, where, e.what());
  }
}

}  // namespace detail

// --- datasets ----------------------------------------------------------------

inline void validate_dataset(const Dataset& d) {
  if (d.variable_count() < 1) throw IoError(IoErrc::SchemaError, "$.variables", "need at least one variable");
  if (d.event_count() < 2) throw IoError(IoErrc::SchemaError, "$.timestamps", "need at least two events");
  if (d.entities.empty()) throw IoError(IoErrc::SchemaError, "$.entities", "need at least one entity");
  std::set<std::string> ids;
  for (std::size_t e = 0; e < d.entities.size(); ++e) {
    const auto& entity = d.entities[e];
    const std::string path = "$.entities[" + std::to_string(e) + "]";
    if (!ids.insert(entity.id).second) throw IoError(IoErrc::SchemaError, path + ".id", "duplicate id " + entity.id);
    if (entity.series.size() != d.variable_names.size()) {
      throw IoError(IoErrc::LengthMismatch, path + ".series", "series count differs from variables");
    }
    for (std::size_t v = 0; v < entity.series.size(); ++v) {
      if (entity.series[v].size() != d.timestamps.size()) {
        throw IoError(IoErrc::LengthMismatch, path + ".series[" + std::to_string(v) + "]",
                      "length " + std::to_string(entity.series[v].size()) + " differs from " +
                          std::to_string(d.timestamps.size()) + " timestamps");
      }
      for (double x : entity.series[v]) {
        if (!std::isfinite(x)) throw IoError(IoErrc::SchemaError, path, "non-finite value");
      }
    }
  }
}

inline Dataset load_dataset(std::string_view bytes) {
  const Json j = detail::parse_json(bytes, "$");
  Dataset d;
  const auto& vars = detail::array(detail::require(j, "variables", "$"), "$.variables");
  for (std::size_t i = 0; i < vars.size(); ++i) d.variable_names.push_back(detail::text(vars[i], "$.variables[" + std::to_string(i) + "]"));
  const auto& ts = detail::array(detail::require(j, "timestamps", "$"), "$.timestamps");
  for (std::size_t i = 0; i < ts.size(); ++i) d.timestamps.push_back(detail::text(ts[i], "$.timestamps[" + std::to_string(i) + "]"));
  const auto& entities = detail::array(detail::require(j, "entities", "$"), "$.entities");
  for (std::size_t e = 0; e < entities.size(); ++e) {
    const std::string path = "$.entities[" + std::to_string(e) + "]";
    const auto& je = entities[e];
    Entity entity;
    entity.id = detail::text(detail::require(je, "id", path), path + ".id");
    entity.name = detail::text(detail::require(je, "name", path), path + ".name");
    entity.position = Vec2(detail::number(detail::require(je, "x", path), path + ".x"),
                           detail::number(detail::require(je, "y", path), path + ".y"));
    const auto& series = detail::array(detail::require(je, "series", path), path + ".series");
    for (std::size_t v = 0; v < series.size(); ++v) {
      const std::string sp = path + ".series[" + std::to_string(v) + "]";
      const auto& values = detail::array(series[v], sp);
      std::vector<double> out;
      out.reserve(values.size());
      for (std::size_t t = 0; t < values.size(); ++t) out.push_back(detail::number(values[t], sp + "[" + std::to_string(t) + "]"));
      entity.series.push_back(std::move(out));
    }
    d.entities.push_back(std::move(entity));
  }
  validate_dataset(d);
  return d;
}

inline Json dataset_json(const Dataset& d) {
  Json j;
  j["variables"] = d.variable_names;
  j["timestamps"] = d.timestamps;
  Json entities = Json::array();
  for (const auto& e : d.entities) {
    Json je;
    je["id"] = e.id;
    je["name"] = e.name;
    je["x"] = e.position.x();
    je["y"] = e.position.y();
    je["series"] = e.series;
    entities.push_back(std::move(je));
  }
  j["entities"] = std::move(entities);
  return j;
}

inline std::string save_dataset(const Dataset& d) { return dataset_json(d).dump() + "\n"; }

// --- generator -----------------------------------------------------------------

struct GenParams {
  int entities = 39;
  int variables = 5;
  int events = 150;
  std::uint64_t seed = 0;
  double value_min = 0.0;
  double value_max = 100.0;
  int seasonal_period = 50;
  double noise_amp = 6.0;
};

struct Place {
  std::string_view id;
  std::string_view name;
  double lon;
  double lat;
};

// Approximate geographic centres.
inline constexpr std::array<Place, 39> kEuropeanPlaces{{
    {"AL", "Albania", 20.0, 41.1},        {"AT", "Austria", 14.6, 47.6},
    {"BA", "Bosnia and Herzegovina", 17.8, 44.2}, {"BE", "Belgium", 4.5, 50.6},
    {"BG", "Bulgaria", 25.3, 42.7},       {"BY", "Belarus", 28.0, 53.7},
    {"CH", "Switzerland", 8.2, 46.8},     {"CZ", "Czechia", 15.3, 49.8},
    {"DE", "Germany", 10.4, 51.2},        {"DK", "Denmark", 9.5, 56.0},
    {"EE", "Estonia", 25.0, 58.6},        {"ES", "Spain", -3.7, 40.2},
    {"FI", "Finland", 26.0, 64.0},        {"FR", "France", 2.4, 46.6},
    {"GB", "United Kingdom", -2.0, 53.5}, {"GR", "Greece", 22.0, 39.3},
    {"HR", "Croatia", 16.4, 45.1},        {"HU", "Hungary", 19.5, 47.2},
    {"IE", "Ireland", -8.0, 53.2},        {"IS", "Iceland", -18.6, 64.9},
    {"IT", "Italy", 12.5, 42.8},          {"LT", "Lithuania", 23.9, 55.3},
    {"LU", "Luxembourg", 6.1, 49.8},      {"LV", "Latvia", 24.6, 56.9},
    {"MD", "Moldova", 28.4, 47.2},        {"ME", "Montenegro", 19.3, 42.7},
    {"MK", "North Macedonia", 21.7, 41.6}, {"NL", "Netherlands", 5.3, 52.2},
    {"NO", "Norway", 9.0, 61.0},          {"PL", "Poland", 19.4, 52.1},
    {"PT", "Portugal", -8.2, 39.6},       {"RO", "Romania", 25.0, 45.9},
    {"RS", "Serbia", 20.9, 44.0},         {"SE", "Sweden", 16.0, 62.0},
    {"SI", "Slovenia", 14.8, 46.1},       {"SK", "Slovakia", 19.7, 48.7},
    {"UA", "Ukraine", 31.2, 49.0},        {"XK", "Kosovo", 20.9, 42.6},
    {"CY", "Cyprus", 33.2, 35.0},
}};

inline constexpr std::array<std::string_view, 8> kFruitNames{
    "Apples", "Bananas", "Berries", "Grapes", "Oranges", "Pears", "Plums", "Cherries"};

inline constexpr double kMetersPerDegree = 2.0;

/// Floor position of a longitude/latitude: x east, -z north, longitude
/// scaled by cos(50 deg) so central Europe keeps its proportions.
inline Vec2 map_position(double lon, double lat) {
  return {kMetersPerDegree * lon * std::cos(deg_to_rad(50.0)), -kMetersPerDegree * lat};
}

/// ISO calendar date `days` after 2020-01-01.
inline std::string iso_day(int days) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{year{2020} / January / 1} + std::chrono::days{days}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

inline int count_local_maxima(const std::vector<double>& s) {
  int n = 0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] > s[i - 1] && s[i] > s[i + 1]) ++n;
  }
  return n;
}

namespace detail {
inline std::vector<double> generate_series(const GenParams& p, int entity, int variable, std::uint64_t attempt) {
  SplitMix64 rng(derive_seed(p.seed, static_cast<std::uint64_t>(entity), static_cast<std::uint64_t>(variable), attempt));
  const double mid = 0.5 * (p.value_min + p.value_max);
  const double amp = 0.4 * (p.value_max - p.value_min);
  const double phase = rng.uniform() * static_cast<double>(p.seasonal_period);
  std::vector<double> out(static_cast<std::size_t>(p.events));
  for (int t = 0; t < p.events; ++t) {
    const double wave = std::sin(kTwoPi * (static_cast<double>(t) + phase) / static_cast<double>(p.seasonal_period));
    const double noise = p.noise_amp * (2.0 * rng.uniform() - 1.0);
    const double v = std::clamp(mid + amp * wave + noise, p.value_min, p.value_max);
    out[static_cast<std::size_t>(t)] = std::round(v * 100.0) / 100.0;
  }
  return out;
}
}  // namespace detail

inline void validate(const GenParams& p) {
  if (p.entities < 1) throw IoError(IoErrc::InvalidParams, "entities", "must be >= 1");
  if (p.variables < 1) throw IoError(IoErrc::InvalidParams, "variables", "must be >= 1");
  if (p.events < 2) throw IoError(IoErrc::InvalidParams, "events", "must be >= 2");
  if (p.seasonal_period < 2) throw IoError(IoErrc::InvalidParams, "seasonal_period", "must be >= 2");
  if (!(p.value_min < p.value_max)) throw IoError(IoErrc::InvalidParams, "value_range", "min must be below max");
  if (!(p.noise_amp >= 0.0) || !std::isfinite(p.noise_amp)) throw IoError(IoErrc::InvalidParams, "noise_amp", "must be >= 0");
}

inline Dataset generate_dataset(const GenParams& p) {
  validate(p);
  Dataset d;
  for (int v = 0; v < p.variables; ++v) {
    d.variable_names.push_back(v < static_cast<int>(kFruitNames.size()) ? std::string(kFruitNames[static_cast<std::size_t>(v)])
                                                                          : "Variable " + std::to_string(v + 1));
  }
  for (int t = 0; t < p.events; ++t) d.timestamps.push_back(iso_day(t));
  const bool need_peaks = p.events >= 2 * p.seasonal_period;
  for (int e = 0; e < p.entities; ++e) {
    Entity entity;
    if (e < static_cast<int>(kEuropeanPlaces.size())) {
      const auto& place = kEuropeanPlaces[static_cast<std::size_t>(e)];
      entity.id = place.id;
      entity.name = place.name;
      entity.position = map_position(place.lon, place.lat);
    } else {
      // extra entities continue on a 3 m grid south of the map
      const int k = e - static_cast<int>(kEuropeanPlaces.size());
      entity.id = "R" + std::to_string(k + 1);
      entity.name = "Region " + std::to_string(k + 1);
      entity.position = Vec2(3.0 * static_cast<double>(k % 10), 3.0 * static_cast<double>(k / 10) + 10.0);
    }
    for (int v = 0; v < p.variables; ++v) {
      std::uint64_t attempt = 0;
      auto series = detail::generate_series(p, e, v, attempt);
      while (need_peaks && count_local_maxima(series) < 3 && attempt < 64) {
        series = detail::generate_series(p, e, v, ++attempt);
      }
      entity.series.push_back(std::move(series));
    }
    d.entities.push_back(std::move(entity));
  }
  return d;
}

// --- traces ----------------------------------------------------------------------

struct TraceRecord {
  std::int64_t t_ms = 0;
  Pose head;
  std::optional<HandFrame> left;
  std::optional<HandFrame> right;
  std::optional<std::string> mark;  // task segment marker, carried into the log
};

inline Json hand_json(const HandFrame& f) {
  Json j;
  j["palm"] = detail::vec3_json(f.palm_pos);
  j["normal"] = detail::vec3_json(f.palm_normal);
  j["dir"] = detail::vec3_json(f.palm_dir);
  Json tips = Json::array();
  Json curls = Json::array();
  for (const auto& finger : f.fingers) {
    tips.push_back(detail::vec3_json(finger.tip));
    curls.push_back(finger.curl);
  }
  j["tips"] = std::move(tips);
  j["curl"] = std::move(curls);
  return j;
}

inline HandFrame hand_from_json(const Json& j, HandSide side, std::int64_t t_ms, const std::string& path) {
  HandFrame f;
  f.side = side;
  f.t_ms = t_ms;
  f.palm_pos = detail::vec3(detail::require(j, "palm", path), path + ".palm");
  f.palm_normal = detail::vec3(detail::require(j, "normal", path), path + ".normal");
  f.palm_dir = detail::vec3(detail::require(j, "dir", path), path + ".dir");
  const auto& tips = detail::array(detail::require(j, "tips", path), path + ".tips", 5);
  const auto& curls = detail::array(detail::require(j, "curl", path), path + ".curl", 5);
  for (std::size_t k = 0; k < 5; ++k) {
    f.fingers[k].tip = detail::vec3(tips[k], path + ".tips[" + std::to_string(k) + "]");
    f.fingers[k].curl = detail::number(curls[k], path + ".curl[" + std::to_string(k) + "]");
  }
  try {
    validate(f);
  } catch (const MalformedFrame& e) {
    throw IoError(IoErrc::SchemaError, path, e.what());
  }
  return f;
}

inline Json trace_json(const TraceRecord& r) {
  Json j;
  j["t_ms"] = r.t_ms;
  const auto& q = r.head.orientation;
  j["head"] = Json{{"pos", detail::vec3_json(r.head.position)}, {"quat", Json::array({q.w(), q.x(), q.y(), q.z()})}};
  j["left"] = r.left ? hand_json(*r.left) : Json(nullptr);
  j["right"] = r.right ? hand_json(*r.right) : Json(nullptr);
  if (r.mark) j["mark"] = *r.mark;
  return j;
}

inline std::string serialize_trace(const TraceRecord& r) { return trace_json(r).dump(); }

inline TraceRecord parse_trace(std::string_view line, const std::string& where = "$") {
  const Json j = detail::parse_json(line, where);
  TraceRecord r;
  const auto& t = detail::require(j, "t_ms", where);
  if (!t.is_number_integer()) throw IoError(IoErrc::SchemaError, where + ".t_ms", "expected integer");
  r.t_ms = t.get<std::int64_t>();
  const auto& head = detail::require(j, "head", where);
  r.head.position = detail::vec3(detail::require(head, "pos", where + ".head"), where + ".head.pos");
  const auto& q = detail::array(detail::require(head, "quat", where + ".head"), where + ".head.quat", 4);
  r.head.orientation = Quat(detail::number(q[0], where), detail::number(q[1], where), detail::number(q[2], where),
                            detail::number(q[3], where));
  if (std::abs(r.head.orientation.norm() - 1.0) > 1e-4) {
    throw IoError(IoErrc::SchemaError, where + ".head.quat", "quaternion is not unit length");
  }
  const auto& left = detail::require(j, "left", where);
  const auto& right = detail::require(j, "right", where);
  if (!left.is_null()) r.left = hand_from_json(left, HandSide::Left, r.t_ms, where + ".left");
  if (!right.is_null()) r.right = hand_from_json(right, HandSide::Right, r.t_ms, where + ".right");
  if (auto it = j.find("mark"); it != j.end()) r.mark = detail::text(*it, where + ".mark");
  return r;
}

/// Reads every non-empty line; checks strictly increasing time.
inline std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto r = parse_trace(line, "line " + std::to_string(n));
    if (!out.empty() && r.t_ms <= out.back().t_ms) {
      throw IoError(IoErrc::NonMonotonicTrace, "line " + std::to_string(n), "t_ms does not increase");
    }
    out.push_back(std::move(r));
  }
  return out;
}

// --- logs ----------------------------------------------------------------------

inline constexpr std::string_view kMarkerEvent = "TaskMarker";
inline constexpr std::string_view kMarkerTag = "none";

struct LogRecord {
  std::string session_id;
  std::uint64_t seq = 0;
  std::int64_t t_ms = 0;
  std::string event;
  std::string task_tag;
  std::optional<std::string> chart_id;
  Json payload = Json::object();

  bool is_marker() const { return event == kMarkerEvent; }
  bool operator==(const LogRecord&) const = default;
};

inline Json log_json(const LogRecord& r) {
  Json j;
  j["session_id"] = r.session_id;
  j["seq"] = r.seq;
  j["t_ms"] = r.t_ms;
  j["event"] = r.event;
  j["task_tag"] = r.task_tag;
  j["chart_id"] = r.chart_id ? Json(*r.chart_id) : Json(nullptr);
  j["payload"] = r.payload;
  return j;
}

inline std::string serialize_log(const LogRecord& r) { return log_json(r).dump(); }

inline LogRecord log_from_json(const Json& j, const std::string& where) {
  LogRecord r;
  r.session_id = detail::text(detail::require(j, "session_id", where), where + ".session_id");
  const auto& seq = detail::require(j, "seq", where);
  if (!seq.is_number_unsigned() && !(seq.is_number_integer() && seq.get<std::int64_t>() >= 0)) {
    throw IoError(IoErrc::SchemaError, where + ".seq", "expected non-negative integer");
  }
  r.seq = seq.get<std::uint64_t>();
  const auto& t = detail::require(j, "t_ms", where);
  if (!t.is_number_integer()) throw IoError(IoErrc::SchemaError, where + ".t_ms", "expected integer");
  r.t_ms = t.get<std::int64_t>();
  r.event = detail::text(detail::require(j, "event", where), where + ".event");
  r.task_tag = detail::text(detail::require(j, "task_tag", where), where + ".task_tag");
  const auto& chart = detail::require(j, "chart_id", where);
  if (!chart.is_null()) r.chart_id = detail::text(chart, where + ".chart_id");
  r.payload = detail::require(j, "payload", where);
  if (!r.payload.is_object()) throw IoError(IoErrc::SchemaError, where + ".payload", "expected object");
  return r;
}

inline LogRecord parse_log(std::string_view line, const std::string& where = "$") {
  return log_from_json(detail::parse_json(line, where), where);
}

inline std::vector<LogRecord> read_log(std::istream& in) {
  std::vector<LogRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(parse_log(line, "line " + std::to_string(n)));
  }
  return out;
}

inline void write_log(std::ostream& out, const std::vector<LogRecord>& records) {
  for (const auto& r : records) out << serialize_log(r) << '\n';
}

inline LogRecord to_log_record(const InteractionEvent& e, const std::string& session_id, std::uint64_t seq) {
  return {session_id, seq, e.t_ms, std::string(to_string(e.kind)), std::string(to_string(e.task_tag)), e.chart_id,
          e.payload};
}

// --- replay --------------------------------------------------------------------

struct ReplayOptions {
  EngineConfig engine;
  SensorModel sensor;
  std::uint64_t seed = 0;
  std::string session_id = "replay";
};

/// Trace records in, log records out: the tracker model, the engine and a
/// dense log sequence. The service runs the same pipeline per connection.
class SessionRunner {
 public:
  SessionRunner(std::shared_ptr<const Dataset> dataset, ReplayOptions options)
      : options_(std::move(options)),
        engine_(initial_state(std::move(dataset), options_.engine)),
        tracker_(TrackerState::seeded(options_.seed)) {
    options_.sensor.validate();
  }

  struct Output {
    Observation observation;
    std::vector<LogRecord> records;
    std::vector<InteractionEvent> events;
  };

  /// Throws EngineError{NonMonotonicTime} on a stale timestamp, leaving the
  /// session untouched.
  Output feed(const TraceRecord& r) {
    if (engine_.last_t_ms && r.t_ms <= *engine_.last_t_ms) {
      throw EngineError(EngineErrc::NonMonotonicTime, "t_ms " + std::to_string(r.t_ms) + " does not increase");
    }
    Output out;
    out.observation = observe(options_.sensor, tracker_, r.head, r.left, r.right);
    InputSample sample{r.t_ms, r.head, out.observation.left, out.observation.right};
    auto result = step(engine_, sample, options_.engine);
    engine_ = std::move(result.state);
    tracker_ = out.observation.next;
    if (r.mark) {
      out.records.push_back({options_.session_id, next_seq_++, r.t_ms, std::string(kMarkerEvent), std::string(kMarkerTag),
                             std::nullopt, Json{{"label", *r.mark}}});
    }
    for (const auto& e : result.events) out.records.push_back(to_log_record(e, options_.session_id, next_seq_++));
    out.events = std::move(result.events);
    return out;
  }

  const EngineState& engine() const { return engine_; }
  const TrackerState& tracker() const { return tracker_; }
  const ReplayOptions& options() const { return options_; }

 private:
  ReplayOptions options_;
  EngineState engine_;
  TrackerState tracker_;
  std::uint64_t next_seq_ = 0;
};

inline std::vector<LogRecord> replay(std::shared_ptr<const Dataset> dataset, const std::vector<TraceRecord>& trace,
                                     const ReplayOptions& options = {}) {
  SessionRunner runner(std::move(dataset), options);
  std::vector<LogRecord> log;
  std::optional<std::int64_t> last;
  for (const auto& r : trace) {
    if (last && r.t_ms <= *last) throw IoError(IoErrc::NonMonotonicTrace, "t_ms " + std::to_string(r.t_ms), "does not increase");
    last = r.t_ms;
    auto out = runner.feed(r);
    for (auto& rec : out.records) log.push_back(std::move(rec));
  }
  return log;
}

inline std::vector<LogRecord> replay(std::shared_ptr<const Dataset> dataset, std::istream& trace,
                                     const ReplayOptions& options = {}) {
  return replay(std::move(dataset), read_trace(trace), options);
}

// --- statistics -----------------------------------------------------------------

struct SessionStats {
  std::int64_t duration_ms = 0;
  std::size_t total_events = 0;
  std::map<std::string, std::size_t> event_counts;
  std::map<std::string, std::size_t> task_counts;
  std::vector<std::int64_t> segment_ms;
  double segment_mean_ms = 0.0;
  double segment_sd_ms = 0.0;  // population
};

inline SessionStats analyze_log(const std::vector<LogRecord>& records) {
  SessionStats s;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    if (b.t_ms < a.t_ms || (a.session_id == b.session_id && b.seq <= a.seq)) {
      throw IoError(IoErrc::UnorderedLog, "record " + std::to_string(i), "out of order");
    }
  }
  if (records.empty()) return s;
  s.duration_ms = records.back().t_ms - records.front().t_ms;
  std::optional<std::int64_t> last_marker;
  for (const auto& r : records) {
    if (r.is_marker()) {
      if (last_marker) s.segment_ms.push_back(r.t_ms - *last_marker);
      last_marker = r.t_ms;
      continue;
    }
    ++s.total_events;
    ++s.event_counts[r.event];
    ++s.task_counts[r.task_tag];
  }
  if (!s.segment_ms.empty()) {
    double sum = 0.0;
    for (auto d : s.segment_ms) sum += static_cast<double>(d);
    s.segment_mean_ms = sum / static_cast<double>(s.segment_ms.size());
    double sq = 0.0;
    for (auto d : s.segment_ms) sq += (static_cast<double>(d) - s.segment_mean_ms) * (static_cast<double>(d) - s.segment_mean_ms);
    s.segment_sd_ms = std::sqrt(sq / static_cast<double>(s.segment_ms.size()));
  }
  return s;
}

inline Json stats_json(const SessionStats& s) {
  Json j;
  j["duration_ms"] = s.duration_ms;
  j["total_events"] = s.total_events;
  j["event_counts"] = Json::object();
  for (const auto& [k, v] : s.event_counts) j["event_counts"][k] = v;
  j["task_counts"] = Json::object();
  for (const auto& [k, v] : s.task_counts) j["task_counts"][k] = v;
  j["segments"] = s.segment_ms.size();
  j["segment_mean_ms"] = s.segment_mean_ms;
  j["segment_sd_ms"] = s.segment_sd_ms;
  return j;
}

}  // namespace gce
