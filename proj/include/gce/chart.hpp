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

// Data model and geometry of a single 3D Radar Chart: a vertical time axis
// with one radial axis per active variable, a movable time slice, a
// stack-based zoom history and sort/filter arrangement of the variables.
//
// Every operation is a pure function taking the chart by value and returning
// the updated chart; precondition violations throw ChartError.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gce/geometry.hpp"

namespace gce {

struct Entity {
  std::string id;
  std::string name;
  Vec2 position = Vec2::Zero();               // meters, floor plane
  std::vector<std::vector<double>> series;    // [variable][event]
};

struct Dataset {
  std::vector<std::string> variable_names;
  std::vector<std::string> timestamps;
  std::vector<Entity> entities;

  int variable_count() const { return static_cast<int>(variable_names.size()); }
  int event_count() const { return static_cast<int>(timestamps.size()); }

  const Entity* find(std::string_view id) const {
    for (const auto& e : entities) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }
};

enum class ChartMode { Inactive, ActiveRotate, ReconfigureFilter };

inline constexpr std::string_view to_string(ChartMode m) {
  switch (m) {
    case ChartMode::Inactive: return "Inactive";
    case ChartMode::ActiveRotate: return "ActiveRotate";
    case ChartMode::ReconfigureFilter: return "ReconfigureFilter";
  }
  return "Inactive";
}

/// Mode Toggle cycle: Inactive -> ActiveRotate -> ReconfigureFilter -> Inactive.
inline constexpr ChartMode next_mode(ChartMode m) {
  switch (m) {
    case ChartMode::Inactive: return ChartMode::ActiveRotate;
    case ChartMode::ActiveRotate: return ChartMode::ReconfigureFilter;
    case ChartMode::ReconfigureFilter: return ChartMode::Inactive;
  }
  return ChartMode::Inactive;
}

/// Inclusive range of event indices.
struct EventWindow {
  int lo = 0;
  int hi = 0;

  int span() const { return hi - lo; }
  bool contains(int i) const { return lo <= i && i <= hi; }
  bool contains(const EventWindow& w) const { return lo <= w.lo && w.hi <= hi; }
  bool strictly_contains(const EventWindow& w) const { return contains(w) && w != *this; }
  int clamp(int i) const { return std::clamp(i, lo, hi); }
  bool operator==(const EventWindow&) const = default;
};

struct ChartConfig {
  double length_m = 1.0;   // virtual length of the time axis
  double radius_m = 0.3;   // maximum data-axis radius
};

struct ChartInstance {
  std::string entity_id;
  int event_count = 2;
  int variable_count = 1;
  double length_m = 1.0;
  double radius_m = 0.3;
  ChartMode mode = ChartMode::Inactive;
  double yaw_rad = 0.0;
  std::vector<int> arrangement;
  EventWindow visible_window;
  std::optional<EventWindow> selected_range;
  int slice_index = 0;
  std::vector<EventWindow> zoom_stack;

  bool operator==(const ChartInstance&) const = default;
};

enum class ChartErrc {
  OutOfWindow,
  InactiveChart,
  DegenerateRange,
  NoRangeSelected,
  NoHistory,
  WrongMode,
  UnknownVariable,
  LastVariable,
};

inline constexpr std::string_view to_string(ChartErrc e) {
  switch (e) {
    case ChartErrc::OutOfWindow: return "OutOfWindow";
    case ChartErrc::InactiveChart: return "InactiveChart";
    case ChartErrc::DegenerateRange: return "DegenerateRange";
    case ChartErrc::NoRangeSelected: return "NoRangeSelected";
    case ChartErrc::NoHistory: return "NoHistory";
    case ChartErrc::WrongMode: return "WrongMode";
    case ChartErrc::UnknownVariable: return "UnknownVariable";
    case ChartErrc::LastVariable: return "LastVariable";
  }
  return "ChartError";
}

class ChartError : public std::runtime_error {
 public:
  explicit ChartError(ChartErrc code)
      : std::runtime_error(std::string(to_string(code))), code_(code) {}
  ChartErrc code() const noexcept { return code_; }

 private:
  ChartErrc code_;
};

namespace detail {
inline void require_active(const ChartInstance& c) {
  if (c.mode == ChartMode::Inactive) throw ChartError(ChartErrc::InactiveChart);
}
inline void require_mode(const ChartInstance& c, ChartMode m) {
  if (c.mode != m) throw ChartError(ChartErrc::WrongMode);
}
inline std::vector<int>::const_iterator find_variable(const ChartInstance& c, int variable) {
  auto it = std::find(c.arrangement.begin(), c.arrangement.end(), variable);
  if (it == c.arrangement.end()) throw ChartError(ChartErrc::UnknownVariable);
  return it;
}
}  // namespace detail

inline ChartInstance new_chart(const Entity& entity, int event_count, const ChartConfig& config = {}) {
  ChartInstance c;
  c.entity_id = entity.id;
  c.event_count = event_count;
  c.variable_count = static_cast<int>(entity.series.size());
  c.length_m = config.length_m;
  c.radius_m = config.radius_m;
  c.arrangement.resize(static_cast<std::size_t>(c.variable_count));
  for (int v = 0; v < c.variable_count; ++v) c.arrangement[static_cast<std::size_t>(v)] = v;
  c.visible_window = {0, event_count - 1};
  return c;
}

/// Vertical distance between adjacent events of the visible window.
inline double event_gap(const ChartInstance& c) {
  return c.length_m / static_cast<double>(c.visible_window.span());
}

/// Height of an event above the base of the time axis.
inline double event_to_height(const ChartInstance& c, int index) {
  if (!c.visible_window.contains(index)) throw ChartError(ChartErrc::OutOfWindow);
  return static_cast<double>(index - c.visible_window.lo) * event_gap(c);
}

/// Nearest visible event to a height; heights outside the axis clamp.
inline int height_to_event(const ChartInstance& c, double h) {
  h = std::clamp(h, 0.0, c.length_m);
  const double steps = std::round(h / c.length_m * static_cast<double>(c.visible_window.span()));
  return c.visible_window.clamp(c.visible_window.lo + static_cast<int>(steps));
}

/// Min-max normalization over the full series; a constant series maps to 0.5.
inline double normalize_value(const std::vector<double>& series, double v) {
  const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
  if (*mx == *mn) return 0.5;
  return std::clamp((v - *mn) / (*mx - *mn), 0.0, 1.0);
}

inline ChartInstance select_time_event(ChartInstance c, int index) {
  detail::require_active(c);
  c.slice_index = c.visible_window.clamp(index);
  return c;
}

inline ChartInstance select_time_range(ChartInstance c, int a, int b) {
  detail::require_active(c);
  a = c.visible_window.clamp(a);
  b = c.visible_window.clamp(b);
  if (a == b) throw ChartError(ChartErrc::DegenerateRange);
  c.selected_range = EventWindow{std::min(a, b), std::max(a, b)};
  return c;
}

inline ChartInstance zoom_in(ChartInstance c) {
  if (!c.selected_range || !c.visible_window.strictly_contains(*c.selected_range)) {
    throw ChartError(ChartErrc::NoRangeSelected);
  }
  c.zoom_stack.push_back(c.visible_window);
  c.visible_window = *c.selected_range;
  c.selected_range.reset();
  c.slice_index = c.visible_window.clamp(c.slice_index);
  return c;
}

inline ChartInstance zoom_out(ChartInstance c) {
  if (c.zoom_stack.empty()) throw ChartError(ChartErrc::NoHistory);
  c.visible_window = c.zoom_stack.back();
  c.zoom_stack.pop_back();
  c.selected_range.reset();
  c.slice_index = c.visible_window.clamp(c.slice_index);
  return c;
}

/// Angle of arrangement slot `slot` out of `count`, chart-local radians.
inline double slot_angle(int slot, int count) {
  return kTwoPi * static_cast<double>(slot) / static_cast<double>(count);
}

/// Slot whose even angular sector contains a chart-local angle.
inline int slot_for_angle(double local_angle, int count) {
  const double sector = kTwoPi / static_cast<double>(count);
  const double shifted = wrap_two_pi(local_angle + 0.5 * sector);
  const int slot = static_cast<int>(std::floor(shifted / sector));
  return std::clamp(slot, 0, count - 1);
}

/// Moves `variable` to the slot containing `insert_angle`, measured in the
/// chart-local frame (world azimuth minus chart yaw).
inline ChartInstance apply_arrangement(ChartInstance c, int variable, double insert_angle) {
  detail::require_mode(c, ChartMode::ReconfigureFilter);
  auto it = detail::find_variable(c, variable);
  const int count = static_cast<int>(c.arrangement.size());
  const int slot = slot_for_angle(insert_angle, count);
  c.arrangement.erase(it);
  c.arrangement.insert(c.arrangement.begin() + slot, variable);
  return c;
}

/// Removes a variable axis. Only reset_chart brings it back.
inline ChartInstance filter_variable(ChartInstance c, int variable) {
  detail::require_mode(c, ChartMode::ReconfigureFilter);
  auto it = detail::find_variable(c, variable);
  if (c.arrangement.size() < 2) throw ChartError(ChartErrc::LastVariable);
  c.arrangement.erase(it);
  return c;
}

/// Entire time series, all variables in original order. Slice, yaw and mode
/// are kept.
inline ChartInstance reset_chart(ChartInstance c) {
  detail::require_active(c);
  c.arrangement.resize(static_cast<std::size_t>(c.variable_count));
  for (int v = 0; v < c.variable_count; ++v) c.arrangement[static_cast<std::size_t>(v)] = v;
  c.visible_window = {0, c.event_count - 1};
  c.zoom_stack.clear();
  c.selected_range.reset();
  c.slice_index = c.visible_window.clamp(c.slice_index);
  return c;
}

struct InfoPanel {
  struct Value {
    std::string name;
    double value = 0.0;
  };
  struct Vertex {
    double angle = 0.0;
    double radius = 0.0;  // normalized, [0, 1]
  };
  std::string timestamp_label;
  std::vector<Value> values;
  std::vector<Vertex> radar_polygon;
};

inline InfoPanel info_panel(const ChartInstance& c, const Dataset& dataset) {
  detail::require_active(c);
  const Entity* entity = dataset.find(c.entity_id);
  if (entity == nullptr) throw std::invalid_argument("info_panel: unknown entity " + c.entity_id);

  InfoPanel panel;
  panel.timestamp_label = dataset.timestamps.at(static_cast<std::size_t>(c.slice_index));
  const int count = static_cast<int>(c.arrangement.size());
  for (int slot = 0; slot < count; ++slot) {
    const int v = c.arrangement[static_cast<std::size_t>(slot)];
    const auto& series = entity->series.at(static_cast<std::size_t>(v));
    const double raw = series.at(static_cast<std::size_t>(c.slice_index));
    panel.values.push_back({dataset.variable_names.at(static_cast<std::size_t>(v)), raw});
    panel.radar_polygon.push_back({slot_angle(slot, count), normalize_value(series, raw)});
  }
  return panel;
}

/// Checks every structural invariant of a chart; returns the first violation.
inline std::optional<std::string> check_invariants(const ChartInstance& c) {
  const auto& w = c.visible_window;
  if (!(0 <= w.lo && w.lo < w.hi && w.hi <= c.event_count - 1)) return "visible window out of bounds";
  if (c.selected_range) {
    const auto& r = *c.selected_range;
    if (!(w.lo <= r.lo && r.lo < r.hi && r.hi <= w.hi)) return "selected range outside window";
  }
  if (!w.contains(c.slice_index)) return "slice outside window";
  if (c.arrangement.empty()) return "empty arrangement";
  std::vector<bool> seen(static_cast<std::size_t>(c.variable_count), false);
  for (int v : c.arrangement) {
    if (v < 0 || v >= c.variable_count) return "arrangement index out of range";
    if (seen[static_cast<std::size_t>(v)]) return "duplicate variable in arrangement";
    seen[static_cast<std::size_t>(v)] = true;
  }
  for (std::size_t i = 0; i + 1 < c.zoom_stack.size(); ++i) {
    if (!c.zoom_stack[i].strictly_contains(c.zoom_stack[i + 1])) return "zoom stack not strictly nested";
  }
  for (const auto& entry : c.zoom_stack) {
    if (!entry.strictly_contains(w)) return "visible window escapes zoom history";
  }
  return std::nullopt;
}

}  // namespace gce
