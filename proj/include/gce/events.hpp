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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "gce/chart.hpp"

namespace gce {

using Payload = nlohmann::ordered_json;

enum class EventKind {
  TravelArmed,
  TravelStarted,
  TravelCompleted,
  ModeChanged,
  TimeEventSelected,
  TimeRangePreview,
  TimeRangeApplied,
  ZoomedIn,
  ZoomedOut,
  VariableSorted,
  VariableFiltered,
  ChartReset,
  RotationChanged,
  Paused,
  Resumed,
  SuppressedTravel,
  SnapGuardReverted,
};

inline constexpr std::array<EventKind, 17> kAllEventKinds{
    EventKind::TravelArmed,      EventKind::TravelStarted,    EventKind::TravelCompleted,
    EventKind::ModeChanged,      EventKind::TimeEventSelected, EventKind::TimeRangePreview,
    EventKind::TimeRangeApplied, EventKind::ZoomedIn,          EventKind::ZoomedOut,
    EventKind::VariableSorted,   EventKind::VariableFiltered,  EventKind::ChartReset,
    EventKind::RotationChanged,  EventKind::Paused,            EventKind::Resumed,
    EventKind::SuppressedTravel, EventKind::SnapGuardReverted,
};

inline constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::TravelArmed: return "TravelArmed";
    case EventKind::TravelStarted: return "TravelStarted";
    case EventKind::TravelCompleted: return "TravelCompleted";
    case EventKind::ModeChanged: return "ModeChanged";
    case EventKind::TimeEventSelected: return "TimeEventSelected";
    case EventKind::TimeRangePreview: return "TimeRangePreview";
    case EventKind::TimeRangeApplied: return "TimeRangeApplied";
    case EventKind::ZoomedIn: return "ZoomedIn";
    case EventKind::ZoomedOut: return "ZoomedOut";
    case EventKind::VariableSorted: return "VariableSorted";
    case EventKind::VariableFiltered: return "VariableFiltered";
    case EventKind::ChartReset: return "ChartReset";
    case EventKind::RotationChanged: return "RotationChanged";
    case EventKind::Paused: return "Paused";
    case EventKind::Resumed: return "Resumed";
    case EventKind::SuppressedTravel: return "SuppressedTravel";
    case EventKind::SnapGuardReverted: return "SnapGuardReverted";
  }
  return "";
}

inline std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (EventKind k : kAllEventKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

/// Data-analysis intent an event serves. The Abstract/Elaborate category is
/// split into its two directions; Undo/Redo only ever produces Undo.
enum class TaskTag {
  Select,
  Explore,
  Reconfigure,
  Encode,
  Abstract,
  Elaborate,
  Filter,
  Connect,
  Undo,
  ChangeConfiguration,
};

inline constexpr std::string_view to_string(TaskTag t) {
  switch (t) {
    case TaskTag::Select: return "Select";
    case TaskTag::Explore: return "Explore";
    case TaskTag::Reconfigure: return "Reconfigure";
    case TaskTag::Encode: return "Encode";
    case TaskTag::Abstract: return "Abstract";
    case TaskTag::Elaborate: return "Elaborate";
    case TaskTag::Filter: return "Filter";
    case TaskTag::Connect: return "Connect";
    case TaskTag::Undo: return "Undo";
    case TaskTag::ChangeConfiguration: return "ChangeConfiguration";
  }
  return "";
}

inline std::optional<TaskTag> task_tag_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(TaskTag::ChangeConfiguration); ++i) {
    const auto t = static_cast<TaskTag>(i);
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

/// Task column of the gesture table. ModeChanged depends on the transition:
/// activating elaborates, deactivating abstracts, switching between the two
/// active modes changes configuration.
inline constexpr TaskTag task_tag_for(EventKind kind, std::optional<std::pair<ChartMode, ChartMode>> mode_change = {}) {
  switch (kind) {
    case EventKind::TravelArmed:
    case EventKind::TravelStarted:
    case EventKind::TravelCompleted:
    case EventKind::SuppressedTravel:
      return TaskTag::Explore;
    case EventKind::ModeChanged:
      if (mode_change && mode_change->first == ChartMode::Inactive) return TaskTag::Elaborate;
      if (mode_change && mode_change->second == ChartMode::Inactive) return TaskTag::Abstract;
      return TaskTag::ChangeConfiguration;
    case EventKind::TimeEventSelected:
    case EventKind::TimeRangePreview:
    case EventKind::TimeRangeApplied:
    case EventKind::SnapGuardReverted:
      return TaskTag::Select;
    case EventKind::ZoomedIn: return TaskTag::Elaborate;
    case EventKind::ZoomedOut: return TaskTag::Abstract;
    case EventKind::VariableSorted: return TaskTag::Reconfigure;
    case EventKind::VariableFiltered: return TaskTag::Filter;
    case EventKind::ChartReset: return TaskTag::Undo;
    case EventKind::RotationChanged:
    case EventKind::Paused:
    case EventKind::Resumed:
      return TaskTag::ChangeConfiguration;
  }
  return TaskTag::ChangeConfiguration;
}

/// Events that start a new feature, as opposed to continuing or finishing
/// one already in progress.
inline constexpr bool is_initiation(EventKind kind) {
  switch (kind) {
    case EventKind::TravelStarted:
    case EventKind::ModeChanged:
    case EventKind::ZoomedIn:
    case EventKind::ZoomedOut:
    case EventKind::ChartReset:
    case EventKind::Paused:
    case EventKind::Resumed:
      return true;
    default:
      return false;
  }
}

struct InteractionEvent {
  std::int64_t t_ms = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::TravelArmed;
  std::optional<std::string> chart_id;
  TaskTag task_tag = TaskTag::Explore;
  Payload payload = Payload::object();

  bool operator==(const InteractionEvent&) const = default;
};

}  // namespace gce
