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

// Interaction engine: turns observed hands and head pose into chart
// features. `step` is a pure function of (state, sample); every handler runs
// in a fixed order and at most one new feature starts per step.
//
// World frame is y-up with charts standing on the floor. Hand frames and the
// head arrive in tracking space and are mapped through the viewpoint.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "gce/chart.hpp"
#include "gce/events.hpp"
#include "gce/geometry.hpp"
#include "gce/hand.hpp"
#include "gce/tracker.hpp"

namespace gce {

struct EngineConfig {
  ChartConfig chart;
  PostureConfig posture;
  BimanualConfig bimanual;

  // chart furniture
  double chart_base_m = 0.6;         // floor to the bottom of the time axis
  double toggle_above_m = 0.15;      // Mode Toggle widget above the axis top
  double ring_extra_radius_m = 0.08; // Rotation Handle ring beyond radius_m
  double ring_above_m = 0.04;

  // travel
  std::int64_t gaze_dwell_ms = 500;
  double faraway_min_m = 2.0;
  double point_tol_deg = 15.0;
  std::int64_t transit_ms = 1000;
  double standoff_m = 1.2;
  double suppress_radius_m = 0.3;

  // grasping
  double widget_r_m = 0.06;
  double grasp_capture_m = 0.08;
  bool snap_guard = true;
  std::int64_t guard_window_ms = 100;
  double palm_still_m = 0.015;

  // rotation
  double flick_min_deg_s = 90.0;
  double lambda_per_s = std::numbers::ln2 / 0.5;
  double spin_stop_deg_s = 1.0;
  std::int64_t flick_window_ms = 50;
  double rotation_event_deg = 5.0;

  // bimanual commands
  double zoom_stretch_m = 0.20;
  double zoom_clap_m = 0.20;
  std::int64_t reset_arm_ms = 200;
  double act_radius_m = 1.5;
  double filter_snap = 1.5;
  std::int64_t pause_hold_ms = 1500;
  double pause_still_m = 0.05;

  // world
  double start_border_m = 3.0;  // start this far east of the easternmost chart
  Vec2 play_area{2.0, 2.0};

  // emit null events for swallowed chart errors
  bool debug_events = false;
};

struct InputSample {
  std::int64_t t_ms = 0;
  Pose head;
  ObservedHand left;
  ObservedHand right;
};

// --- gesture contexts -------------------------------------------------------

struct SliceSample {
  std::int64_t t_ms = 0;
  int index = 0;
  Vec3 palm = Vec3::Zero();
  bool operator==(const SliceSample&) const = default;
};

struct SliceGrasp {
  std::string chart_id;
  double start_height = 0.0;   // slice height above the axis base at capture
  double start_grab_y = 0.0;
  int start_slice = 0;
  Vec3 start_palm = Vec3::Zero();
  std::vector<SliceSample> history;  // capture sample first
  bool operator==(const SliceGrasp&) const = default;
};

struct RotationGrasp {
  std::string chart_id;
  double start_yaw = 0.0;
  double last_azimuth = 0.0;
  double accumulated = 0.0;
  double reported_yaw = 0.0;
  std::vector<std::pair<std::int64_t, double>> history;  // (t, accumulated)
  bool operator==(const RotationGrasp&) const = default;
};

struct SphereGrasp {
  std::string chart_id;
  int variable = 0;
  Vec3 position = Vec3::Zero();
  bool connected = true;
  bool operator==(const SphereGrasp&) const = default;
};

using Grasp = std::variant<SliceGrasp, RotationGrasp, SphereGrasp>;

inline const std::string& grasp_chart(const Grasp& g) {
  return std::visit([](const auto& x) -> const std::string& { return x.chart_id; }, g);
}

struct TravelIdle {
  bool operator==(const TravelIdle&) const = default;
};
struct TravelArmed {
  std::string chart_id;
  std::int64_t since_ms = 0;
  bool suppressed = false;
  bool operator==(const TravelArmed&) const = default;
};
struct TravelInTransit {
  std::string chart_id;
  Viewpoint from;
  Viewpoint to;
  std::int64_t t0 = 0;
  bool operator==(const TravelInTransit&) const = default;
};
using TravelState = std::variant<TravelIdle, TravelArmed, TravelInTransit>;

struct GazeDwell {
  std::string chart_id;
  std::int64_t since_ms = 0;
  bool operator==(const GazeDwell&) const = default;
};

struct RangeGesture {
  std::string chart_id;
  Vec3 left_pinch = Vec3::Zero();
  Vec3 right_pinch = Vec3::Zero();
  EventWindow live;  // lo may equal hi while held
  bool operator==(const RangeGesture&) const = default;
};

struct ZoomGesture {
  std::string chart_id;
  double initial_separation = 0.0;
  bool fired = false;
  bool operator==(const ZoomGesture&) const = default;
};

enum class ResetPhase { Idle, Armed, Fired };

struct PauseHold {
  std::int64_t since_ms = 0;
  Vec3 left_anchor = Vec3::Zero();
  Vec3 right_anchor = Vec3::Zero();
  bool operator==(const PauseHold&) const = default;
};

struct Spin {
  double omega = 0.0;  // rad/s
  double reported_yaw = 0.0;
  bool operator==(const Spin&) const = default;
};

struct EngineState {
  std::shared_ptr<const Dataset> dataset;
  std::map<std::string, ChartInstance> charts;
  std::map<std::string, Vec2> layout;
  Viewpoint viewpoint;
  Vec2 play_area{2.0, 2.0};
  bool paused = false;

  TravelState travel = TravelIdle{};
  std::optional<GazeDwell> gaze;
  std::array<std::optional<Grasp>, 2> grasp{};
  std::optional<RangeGesture> range_gesture;
  std::optional<ZoomGesture> zoom_gesture;
  ResetPhase reset = ResetPhase::Idle;
  std::optional<PauseHold> pause_hold;
  bool pause_latched = false;
  std::array<PostureState, 2> posture{};
  std::array<bool, 2> tracked{};
  std::array<std::optional<std::string>, 2> toggle_contact{};
  std::map<std::string, Spin> spins;

  std::optional<std::int64_t> last_t_ms;
  std::uint64_t next_seq = 0;

  bool reset_armed() const { return reset == ResetPhase::Armed; }
  bool in_transit() const { return std::holds_alternative<TravelInTransit>(travel); }
  bool busy() const { return grasp[0] || grasp[1] || range_gesture || zoom_gesture; }
};

enum class EngineErrc { NonMonotonicTime, UnknownChart };

class EngineError : public std::runtime_error {
 public:
  EngineError(EngineErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  EngineErrc code() const noexcept { return code_; }

 private:
  EngineErrc code_;
};

// --- world geometry of chart furniture --------------------------------------

inline double axis_top(const EngineConfig& cfg, const ChartInstance& c) { return cfg.chart_base_m + c.length_m; }

inline double slice_world_height(const EngineConfig& cfg, const ChartInstance& c) {
  return cfg.chart_base_m + event_to_height(c, c.slice_index);
}

inline Vec3 toggle_position(const EngineConfig& cfg, const ChartInstance& c, const Vec2& center) {
  return on_floor(center, axis_top(cfg, c) + cfg.toggle_above_m);
}

inline Vec3 axis_sphere_position(const EngineConfig& cfg, const ChartInstance& c, const Vec2& center, int slot) {
  const int n = static_cast<int>(c.arrangement.size());
  const Vec2 p = center + c.radius_m * from_azimuth(c.yaw_rad + slot_angle(slot, n));
  return on_floor(p, axis_top(cfg, c));
}

inline double ring_radius(const EngineConfig& cfg, const ChartInstance& c) { return c.radius_m + cfg.ring_extra_radius_m; }
inline double ring_height(const EngineConfig& cfg, const ChartInstance& c) { return axis_top(cfg, c) + cfg.ring_above_m; }

/// Centre of the chart volume, the aim point for travel.
inline Vec3 chart_focus(const EngineConfig& cfg, const ChartInstance& c, const Vec2& center) {
  return on_floor(center, cfg.chart_base_m + 0.5 * c.length_m);
}

/// Viewpoint after travelling to the chart at `target`: the head ends up
/// `standoff_m` from the chart axis, on the line from the chart to the
/// current head position, facing the chart. Head height is unchanged.
inline Viewpoint landing_viewpoint(const EngineConfig& cfg, const Viewpoint& vp, const Pose& head_local,
                                   const Vec2& target) {
  const Pose head = vp.to_world(head_local);
  Vec2 away = floor_of(head.position) - target;
  if (away.norm() < 1e-9) away = -floor_of(head.forward());
  if (away.norm() < 1e-9) away = Vec2(1.0, 0.0);
  const Vec2 landing = target + cfg.standoff_m * away.normalized();

  Vec2 facing = floor_of(head.forward());
  if (facing.norm() < 1e-9) facing = floor_of(vp.dir_to_world(Vec3(0.0, 0.0, -1.0)));
  Viewpoint out;
  out.yaw = vp.yaw + signed_yaw_between(facing, target - landing);
  const Vec3 rotated = yaw_rotation(out.yaw) * head_local.position;
  out.position = Vec3(landing.x() - rotated.x(), vp.position.y(), landing.y() - rotated.z());
  return out;
}

inline EngineState initial_state(std::shared_ptr<const Dataset> dataset, const EngineConfig& cfg = {}) {
  if (!dataset || dataset->entities.empty()) throw std::invalid_argument("initial_state: empty dataset");
  EngineState s;
  s.dataset = dataset;
  s.play_area = cfg.play_area;
  double max_x = -std::numeric_limits<double>::infinity();
  double sum_y = 0.0;
  for (const auto& e : dataset->entities) {
    s.charts.emplace(e.id, new_chart(e, dataset->event_count(), cfg.chart));
    s.layout.emplace(e.id, e.position);
    max_x = std::max(max_x, e.position.x());
    sum_y += e.position.y();
  }
  // eastern border, looking west across the map
  s.viewpoint.position = Vec3(max_x + cfg.start_border_m, 0.0, sum_y / static_cast<double>(dataset->entities.size()));
  s.viewpoint.yaw = 0.5 * kPi;
  return s;
}

namespace detail {

inline double round4(double x) { return std::round(x * 1e4) / 1e4; }

inline Payload window_json(const EventWindow& w) { return Payload::array({w.lo, w.hi}); }

struct StepContext {
  const EngineConfig& cfg;
  EngineState& s;
  const InputSample& in;
  std::vector<InteractionEvent>& events;
  std::int64_t dt_ms = 0;
  Pose head;  // world
  std::array<std::optional<HandFrame>, 2> local{};
  std::array<std::optional<HandFrame>, 2> world{};
  bool initiated = false;

  void emit(EventKind kind, std::optional<std::string> chart, Payload payload, TaskTag tag) {
    InteractionEvent e;
    e.t_ms = in.t_ms;
    e.seq = s.next_seq++;
    e.kind = kind;
    e.chart_id = std::move(chart);
    e.task_tag = tag;
    e.payload = std::move(payload);
    events.push_back(std::move(e));
  }
  void emit(EventKind kind, std::optional<std::string> chart, Payload payload = Payload::object()) {
    emit(kind, std::move(chart), std::move(payload), task_tag_for(kind));
  }

  bool tracked(std::size_t i) const { return local[i].has_value(); }
  Posture posture(std::size_t i) const { return s.posture[i].posture; }
  bool both(Posture p) const { return tracked(0) && tracked(1) && posture(0) == p && posture(1) == p; }

  ChartInstance& chart(const std::string& id) {
    auto it = s.charts.find(id);
    if (it == s.charts.end()) throw EngineError(EngineErrc::UnknownChart, "unknown chart " + id);
    return it->second;
  }
  const Vec2& center(const std::string& id) const { return s.layout.at(id); }

  const std::string& label(int index) const {
    return s.dataset->timestamps.at(static_cast<std::size_t>(index));
  }
  const std::string& variable_name(int v) const {
    return s.dataset->variable_names.at(static_cast<std::size_t>(v));
  }
};

/// Nearest active chart whose axis lies within `radius` of `p` on the floor.
inline std::optional<std::string> nearest_active_chart(const EngineState& s, const Vec3& p, double radius) {
  std::optional<std::string> best;
  double best_d = radius;
  for (const auto& [id, c] : s.charts) {
    if (c.mode == ChartMode::Inactive) continue;
    const double d = (s.layout.at(id) - floor_of(p)).norm();
    if (d <= best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

inline void update_postures(StepContext& ctx) {
  Vec3 torso = ctx.in.head.forward();
  torso.y() = 0.0;
  torso = torso.norm() > 1e-9 ? Vec3(torso.normalized()) : Vec3(0.0, 0.0, -1.0);
  const std::array<const ObservedHand*, 2> hands{&ctx.in.left, &ctx.in.right};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& obs = *hands[i];
    if (obs.frame) {
      HandFrame f = *obs.frame;
      f.side = static_cast<HandSide>(i);
      f.t_ms = ctx.in.t_ms;
      ctx.s.posture[i] = classify_posture(f, ctx.s.posture[i], ctx.cfg.posture, torso);
      ctx.local[i] = f;
    } else {
      ctx.s.posture[i] = untracked_posture(ctx.s.posture[i], ctx.in.t_ms);
      ctx.local[i].reset();
    }
    ctx.s.tracked[i] = obs.frame.has_value();
  }
}

inline void refresh_world(StepContext& ctx) {
  ctx.head = ctx.s.viewpoint.to_world(ctx.in.head);
  for (std::size_t i = 0; i < 2; ++i) {
    ctx.world[i] = ctx.local[i] ? std::optional<HandFrame>(to_world(*ctx.local[i], ctx.s.viewpoint)) : std::nullopt;
  }
}

inline void clear_for_pause(EngineState& s) {
  s.grasp = {};
  s.range_gesture.reset();
  s.zoom_gesture.reset();
  s.spins.clear();
  s.gaze.reset();
  if (std::holds_alternative<TravelArmed>(s.travel)) s.travel = TravelIdle{};
  s.reset = ResetPhase::Idle;
  s.toggle_contact = {};
}

/// Returns true when the pause state toggled this step.
inline bool handle_pause(StepContext& ctx) {
  auto& s = ctx.s;
  if (!ctx.both(Posture::OpenStop)) {
    s.pause_hold.reset();
    s.pause_latched = false;
    return false;
  }
  if (s.pause_latched) return false;
  const Vec3& pl = ctx.local[0]->palm_pos;
  const Vec3& pr = ctx.local[1]->palm_pos;
  if (!s.pause_hold || (pl - s.pause_hold->left_anchor).norm() >= ctx.cfg.pause_still_m ||
      (pr - s.pause_hold->right_anchor).norm() >= ctx.cfg.pause_still_m) {
    s.pause_hold = PauseHold{ctx.in.t_ms, pl, pr};
  }
  if (s.in_transit() || ctx.in.t_ms - s.pause_hold->since_ms < ctx.cfg.pause_hold_ms) return false;

  s.paused = !s.paused;
  s.pause_latched = true;
  s.pause_hold.reset();
  if (s.paused) clear_for_pause(s);
  s.toggle_contact = {};
  ctx.emit(s.paused ? EventKind::Paused : EventKind::Resumed, std::nullopt);
  ctx.initiated = true;
  return true;
}

/// Returns true while a transit is (or was until this step) in progress.
inline bool advance_transit(StepContext& ctx) {
  auto* transit = std::get_if<TravelInTransit>(&ctx.s.travel);
  if (!transit) return false;
  const double u = static_cast<double>(ctx.in.t_ms - transit->t0) / static_cast<double>(ctx.cfg.transit_ms);
  if (u >= 1.0) {
    ctx.s.viewpoint = transit->to;
    const std::string id = transit->chart_id;
    ctx.s.travel = TravelIdle{};
    ctx.s.gaze.reset();
    ctx.emit(EventKind::TravelCompleted, id,
             Payload{{"position", {round4(ctx.s.viewpoint.position.x()), round4(ctx.s.viewpoint.position.y()),
                                   round4(ctx.s.viewpoint.position.z())}},
                     {"yaw_deg", round4(rad_to_deg(ctx.s.viewpoint.yaw))}});
  } else {
    const double k = smoothstep(u);
    ctx.s.viewpoint.position = transit->from.position + k * (transit->to.position - transit->from.position);
    ctx.s.viewpoint.yaw = transit->from.yaw + k * wrap_pi(transit->to.yaw - transit->from.yaw);
  }
  return true;
}

inline void report_rotation(StepContext& ctx, const std::string& id, double yaw, double& reported, const char* source) {
  if (std::abs(yaw - reported) < deg_to_rad(ctx.cfg.rotation_event_deg)) return;
  const double delta = yaw - reported;
  reported = yaw;
  ctx.emit(EventKind::RotationChanged, id,
           Payload{{"yaw_deg", round4(rad_to_deg(yaw))}, {"delta_deg", round4(rad_to_deg(delta))}, {"source", source}});
}

inline void advance_spins(StepContext& ctx) {
  const double dt = static_cast<double>(ctx.dt_ms) / 1000.0;
  const double lambda = ctx.cfg.lambda_per_s;
  for (auto it = ctx.s.spins.begin(); it != ctx.s.spins.end();) {
    auto& chart = ctx.chart(it->first);
    auto& spin = it->second;
    if (chart.mode != ChartMode::ActiveRotate) {
      it = ctx.s.spins.erase(it);
      continue;
    }
    const double decay = std::exp(-lambda * dt);
    chart.yaw_rad += spin.omega * (1.0 - decay) / lambda;
    spin.omega *= decay;
    report_rotation(ctx, it->first, chart.yaw_rad, spin.reported_yaw, "spin");
    if (std::abs(spin.omega) < deg_to_rad(ctx.cfg.spin_stop_deg_s)) {
      it = ctx.s.spins.erase(it);
    } else {
      ++it;
    }
  }
}

inline void continue_slice(StepContext& ctx, std::size_t hand, SliceGrasp& g, bool released) {
  auto& chart = ctx.chart(g.chart_id);
  if (!released) {
    const Vec3 gp = grab_point(*ctx.world[hand]);
    const int idx = height_to_event(chart, g.start_height + (gp.y() - g.start_grab_y));
    if (idx != chart.slice_index) {
      chart = select_time_event(chart, idx);
      ctx.emit(EventKind::TimeEventSelected, g.chart_id, Payload{{"index", idx}, {"label", ctx.label(idx)}});
    }
    g.history.push_back({ctx.in.t_ms, chart.slice_index, ctx.world[hand]->palm_pos});
    // Keep just enough history to find the guard anchor of any later release.
    while (g.history.size() >= 2 && g.history[1].t_ms <= ctx.in.t_ms + 1 - ctx.cfg.guard_window_ms) {
      g.history.erase(g.history.begin());
    }
    return;
  }
  if (!ctx.cfg.snap_guard || g.history.empty()) return;
  const std::int64_t window_start = ctx.in.t_ms - ctx.cfg.guard_window_ms;
  const SliceSample* anchor = &g.history.front();
  for (const auto& h : g.history) {
    if (h.t_ms <= window_start) anchor = &h;
  }
  bool still = true;
  for (const auto& h : g.history) {
    if (h.t_ms > window_start && (h.palm - anchor->palm).norm() >= ctx.cfg.palm_still_m) still = false;
  }
  if (still && chart.slice_index != anchor->index) {
    const int from = chart.slice_index;
    chart = select_time_event(chart, anchor->index);
    ctx.emit(EventKind::SnapGuardReverted, g.chart_id, Payload{{"from", from}, {"to", anchor->index}});
    ctx.emit(EventKind::TimeEventSelected, g.chart_id,
             Payload{{"index", anchor->index}, {"label", ctx.label(anchor->index)}, {"settled", true}});
  }
}

inline void continue_rotation(StepContext& ctx, std::size_t hand, RotationGrasp& g, bool released) {
  auto& chart = ctx.chart(g.chart_id);
  const Vec2& center = ctx.center(g.chart_id);
  if (!released) {
    const double az = azimuth(floor_of(grab_point(*ctx.world[hand])) - center);
    g.accumulated += wrap_pi(az - g.last_azimuth);
    g.last_azimuth = az;
    chart.yaw_rad = g.start_yaw + g.accumulated;
    report_rotation(ctx, g.chart_id, chart.yaw_rad, g.reported_yaw, "grab");
    g.history.emplace_back(ctx.in.t_ms, g.accumulated);
    while (g.history.size() >= 2 && g.history[1].first <= ctx.in.t_ms - ctx.cfg.flick_window_ms) {
      g.history.erase(g.history.begin());
    }
    return;
  }
  if (g.history.size() < 2) return;
  const auto& last = g.history.back();
  auto ref = g.history.front();
  for (const auto& h : g.history) {
    if (h.first <= last.first - ctx.cfg.flick_window_ms) ref = h;
  }
  if (last.first <= ref.first) return;
  const double omega = (last.second - ref.second) / (static_cast<double>(last.first - ref.first) / 1000.0);
  if (std::abs(omega) >= deg_to_rad(ctx.cfg.flick_min_deg_s) && chart.mode == ChartMode::ActiveRotate) {
    ctx.s.spins[g.chart_id] = Spin{omega, g.reported_yaw};
  }
}

inline void continue_sphere(StepContext& ctx, std::size_t hand, SphereGrasp& g, bool released) {
  auto& chart = ctx.chart(g.chart_id);
  const Vec2& center = ctx.center(g.chart_id);
  if (!released) {
    g.position = grab_point(*ctx.world[hand]);
    g.connected = (floor_of(g.position) - center).norm() <= ctx.cfg.filter_snap * chart.radius_m;
    return;
  }
  if (chart.mode != ChartMode::ReconfigureFilter) return;
  const std::string name = ctx.variable_name(g.variable);
  if (g.connected) {
    const double local = azimuth(floor_of(g.position) - center) - chart.yaw_rad;
    ChartInstance next = apply_arrangement(chart, g.variable, local);
    if (next.arrangement == chart.arrangement) return;
    chart = std::move(next);
    ctx.emit(EventKind::VariableSorted, g.chart_id,
             Payload{{"variable", g.variable}, {"name", name}, {"arrangement", chart.arrangement}});
    return;
  }
  try {
    chart = filter_variable(chart, g.variable);
    ctx.emit(EventKind::VariableFiltered, g.chart_id,
             Payload{{"variable", g.variable}, {"name", name}, {"arrangement", chart.arrangement}});
  } catch (const ChartError& e) {
    if (ctx.cfg.debug_events) {
      ctx.emit(EventKind::VariableFiltered, g.chart_id,
               Payload{{"variable", g.variable}, {"name", name}, {"null", true}, {"warning", std::string(to_string(e.code()))}});
    }
  }
}

inline void continue_grasps(StepContext& ctx) {
  for (std::size_t i = 0; i < 2; ++i) {
    auto& slot = ctx.s.grasp[i];
    if (!slot) continue;
    const bool released = !ctx.tracked(i) || ctx.posture(i) != Posture::Grab;
    // The fingers are already opening while the release debounces; their
    // tips would drag the grab point, so the grasp holds still until then.
    if (!released && ctx.s.posture[i].pending != Posture::Grab) continue;
    std::visit(
        [&](auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, SliceGrasp>) continue_slice(ctx, i, g, released);
          else if constexpr (std::is_same_v<T, RotationGrasp>) continue_rotation(ctx, i, g, released);
          else continue_sphere(ctx, i, g, released);
        },
        *slot);
    if (released) slot.reset();
  }
}

inline EventWindow pinch_window(const EngineConfig& cfg, const ChartInstance& c, const Vec3& a, const Vec3& b) {
  const int ia = height_to_event(c, a.y() - cfg.chart_base_m);
  const int ib = height_to_event(c, b.y() - cfg.chart_base_m);
  return {std::min(ia, ib), std::max(ia, ib)};
}

inline void continue_range(StepContext& ctx) {
  auto& g = *ctx.s.range_gesture;
  auto& chart = ctx.chart(g.chart_id);
  if (chart.mode == ChartMode::Inactive) {
    ctx.s.range_gesture.reset();
    return;
  }
  if (ctx.both(Posture::Pinch)) {
    g.left_pinch = pinch_point(*ctx.world[0]);
    g.right_pinch = pinch_point(*ctx.world[1]);
    const EventWindow w = pinch_window(ctx.cfg, chart, g.left_pinch, g.right_pinch);
    if (w != g.live) {
      g.live = w;
      ctx.emit(EventKind::TimeRangePreview, g.chart_id, Payload{{"range", window_json(w)}});
    }
    return;
  }
  if (g.live.lo != g.live.hi) {
    chart = select_time_range(chart, g.live.lo, g.live.hi);
    ctx.emit(EventKind::TimeRangeApplied, g.chart_id, Payload{{"range", window_json(*chart.selected_range)}});
  }
  ctx.s.range_gesture.reset();
}

inline std::optional<BimanualRelation> relation(StepContext& ctx) {
  if (!ctx.tracked(0) || !ctx.tracked(1)) return std::nullopt;
  return bimanual_relation(*ctx.world[0], *ctx.world[1], ctx.cfg.bimanual);
}

inline bool zoom_posture(StepContext& ctx, const std::optional<BimanualRelation>& rel) {
  if (!rel) return false;
  for (std::size_t i = 0; i < 2; ++i) {
    if (ctx.posture(i) == Posture::Pinch || ctx.posture(i) == Posture::Grab) return false;
  }
  return rel->palms_facing && rel->vertical_stacked;
}

inline void continue_zoom(StepContext& ctx) {
  auto& g = *ctx.s.zoom_gesture;
  const auto rel = relation(ctx);
  auto& chart = ctx.chart(g.chart_id);
  if (!zoom_posture(ctx, rel) || chart.mode == ChartMode::Inactive) {
    ctx.s.zoom_gesture.reset();
    return;
  }
  if (g.fired) return;
  const double sep = rel->separation_m;
  const bool stretch = sep - g.initial_separation >= ctx.cfg.zoom_stretch_m;
  const bool clap = g.initial_separation - sep >= ctx.cfg.zoom_clap_m;
  if (!stretch && !clap) return;
  g.fired = true;
  const EventKind kind = stretch ? EventKind::ZoomedIn : EventKind::ZoomedOut;
  try {
    chart = stretch ? zoom_in(chart) : zoom_out(chart);
    ctx.emit(kind, g.chart_id,
             Payload{{"window", window_json(chart.visible_window)}, {"depth", chart.zoom_stack.size()}});
  } catch (const ChartError& e) {
    if (ctx.cfg.debug_events) {
      ctx.emit(kind, g.chart_id, Payload{{"null", true}, {"warning", std::string(to_string(e.code()))}});
    }
  }
}

inline void handle_reset(StepContext& ctx, bool can_initiate) {
  auto& s = ctx.s;
  auto family = [&](std::size_t i) {
    return ctx.tracked(i) && (ctx.posture(i) == Posture::IndexUp || ctx.posture(i) == Posture::Point);
  };
  switch (s.reset) {
    case ResetPhase::Idle:
      if (ctx.tracked(0) && ctx.tracked(1) &&
          hold_timer(s.posture[0], Posture::IndexUp, ctx.cfg.reset_arm_ms, ctx.in.t_ms) &&
          hold_timer(s.posture[1], Posture::IndexUp, ctx.cfg.reset_arm_ms, ctx.in.t_ms)) {
        s.reset = ResetPhase::Armed;
      }
      return;
    case ResetPhase::Armed: {
      if (!family(0) || !family(1)) {
        s.reset = ResetPhase::Idle;
        return;
      }
      if (!can_initiate || ctx.initiated) return;
      const auto rel = relation(ctx);
      if (!rel || !rel->indices_crossed) return;
      const Vec3 mid = 0.5 * (ctx.world[0]->palm_pos + ctx.world[1]->palm_pos);
      const auto target = nearest_active_chart(s, mid, ctx.cfg.act_radius_m);
      if (!target) return;
      auto& chart = ctx.chart(*target);
      chart = reset_chart(chart);
      s.reset = ResetPhase::Fired;
      ctx.emit(EventKind::ChartReset, *target, Payload{{"window", window_json(chart.visible_window)}});
      ctx.initiated = true;
      return;
    }
    case ResetPhase::Fired:
      if (!family(0) && !family(1)) s.reset = ResetPhase::Idle;
      return;
  }
}

inline void start_zoom(StepContext& ctx) {
  const auto rel = relation(ctx);
  if (!zoom_posture(ctx, rel)) return;
  const Vec3 mid = 0.5 * (ctx.world[0]->palm_pos + ctx.world[1]->palm_pos);
  const auto target = nearest_active_chart(ctx.s, mid, ctx.cfg.act_radius_m);
  if (!target) return;
  ctx.s.zoom_gesture = ZoomGesture{*target, rel->separation_m, false};
  ctx.initiated = true;
}

inline void start_range(StepContext& ctx) {
  if (!ctx.both(Posture::Pinch)) return;
  const Vec3 a = pinch_point(*ctx.world[0]);
  const Vec3 b = pinch_point(*ctx.world[1]);
  std::optional<std::string> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, c] : ctx.s.charts) {
    if (c.mode == ChartMode::Inactive) continue;
    const Vec2& center = ctx.s.layout.at(id);
    const double lo = ctx.cfg.chart_base_m - ctx.cfg.grasp_capture_m;
    const double hi = axis_top(ctx.cfg, c) + ctx.cfg.grasp_capture_m;
    const double da = (floor_of(a) - center).norm();
    const double db = (floor_of(b) - center).norm();
    if (da > ctx.cfg.grasp_capture_m || db > ctx.cfg.grasp_capture_m) continue;
    if (a.y() < lo || a.y() > hi || b.y() < lo || b.y() > hi) continue;
    if (da + db < best_d) {
      best_d = da + db;
      best = id;
    }
  }
  if (!best) return;
  const auto& chart = ctx.s.charts.at(*best);
  RangeGesture g{*best, a, b, pinch_window(ctx.cfg, chart, a, b)};
  ctx.s.range_gesture = g;
  ctx.emit(EventKind::TimeRangePreview, *best, Payload{{"range", window_json(g.live)}});
  ctx.initiated = true;
}

/// Grab target nearest to the grab point, if any is within reach.
inline std::optional<Grasp> find_grasp_target(StepContext& ctx, std::size_t hand) {
  const HandFrame& f = *ctx.world[hand];
  const Vec3 gp = grab_point(f);
  const double cap = ctx.cfg.grasp_capture_m;
  std::optional<Grasp> best;
  double best_d = std::numeric_limits<double>::infinity();
  auto offer = [&](double d, Grasp g) {
    if (d <= cap && d < best_d) {
      best_d = d;
      best = std::move(g);
    }
  };
  for (const auto& [id, c] : ctx.s.charts) {
    if (c.mode == ChartMode::Inactive) continue;
    const Vec2& center = ctx.s.layout.at(id);
    const double horizontal = (floor_of(gp) - center).norm();

    const double slice_y = slice_world_height(ctx.cfg, c);
    if (horizontal <= c.radius_m + cap) {
      SliceGrasp g;
      g.chart_id = id;
      g.start_height = slice_y - ctx.cfg.chart_base_m;
      g.start_grab_y = gp.y();
      g.start_slice = c.slice_index;
      g.start_palm = f.palm_pos;
      g.history.push_back({ctx.in.t_ms, c.slice_index, f.palm_pos});
      offer(std::abs(gp.y() - slice_y), std::move(g));
    }
    if (c.mode == ChartMode::ActiveRotate) {
      const double d = std::hypot(horizontal - ring_radius(ctx.cfg, c), gp.y() - ring_height(ctx.cfg, c));
      RotationGrasp g;
      g.chart_id = id;
      g.start_yaw = c.yaw_rad;
      g.reported_yaw = c.yaw_rad;
      g.last_azimuth = azimuth(floor_of(gp) - center);
      g.history.emplace_back(ctx.in.t_ms, 0.0);
      offer(d, std::move(g));
    }
    if (c.mode == ChartMode::ReconfigureFilter) {
      for (int slot = 0; slot < static_cast<int>(c.arrangement.size()); ++slot) {
        const Vec3 sphere = axis_sphere_position(ctx.cfg, c, center, slot);
        offer((gp - sphere).norm(),
              SphereGrasp{id, c.arrangement[static_cast<std::size_t>(slot)], gp, true});
      }
    }
  }
  return best;
}

inline void start_grasp(StepContext& ctx) {
  for (std::size_t i = 0; i < 2; ++i) {
    if (!ctx.tracked(i) || ctx.posture(i) != Posture::Grab || ctx.s.posture[i].since_ms != ctx.in.t_ms) continue;
    auto target = find_grasp_target(ctx, i);
    if (!target) continue;
    if (std::holds_alternative<RotationGrasp>(*target)) ctx.s.spins.erase(grasp_chart(*target));
    ctx.s.grasp[i] = std::move(target);
    ctx.initiated = true;
    return;
  }
}

inline std::optional<std::string> widget_contact(StepContext& ctx, std::size_t hand) {
  if (!ctx.tracked(hand)) return std::nullopt;
  const HandFrame& f = *ctx.world[hand];
  std::optional<std::string> best;
  double best_d = ctx.cfg.widget_r_m;
  for (const auto& [id, c] : ctx.s.charts) {
    const Vec3 w = toggle_position(ctx.cfg, c, ctx.s.layout.at(id));
    double d = (f.palm_pos - w).norm();
    for (const auto& finger : f.fingers) d = std::min(d, (finger.tip - w).norm());
    if (d <= best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

inline void handle_mode_toggle(StepContext& ctx, bool can_initiate) {
  for (std::size_t i = 0; i < 2; ++i) {
    const auto contact = widget_contact(ctx, i);
    const bool entering = contact && contact != ctx.s.toggle_contact[i];
    ctx.s.toggle_contact[i] = contact;
    if (!entering || !can_initiate || ctx.initiated) continue;
    auto& chart = ctx.chart(*contact);
    const ChartMode from = chart.mode;
    chart.mode = next_mode(from);
    ctx.emit(EventKind::ModeChanged, *contact,
             Payload{{"from", std::string(to_string(from))}, {"to", std::string(to_string(chart.mode))}},
             task_tag_for(EventKind::ModeChanged, std::pair{from, chart.mode}));
    ctx.initiated = true;
  }
}

inline std::optional<std::string> gaze_target(StepContext& ctx) {
  const Vec3 origin = ctx.head.position;
  const Vec3 dir = ctx.head.forward().normalized();
  std::optional<std::string> best;
  double best_t = std::numeric_limits<double>::infinity();
  for (const auto& [id, c] : ctx.s.charts) {
    const auto t = ray_cylinder(origin, dir, ctx.s.layout.at(id), c.radius_m, ctx.cfg.chart_base_m, axis_top(ctx.cfg, c));
    if (t && *t < best_t) {
      best_t = *t;
      best = id;
    }
  }
  return best;
}

inline bool near_any_toggle(StepContext& ctx) {
  for (std::size_t i = 0; i < 2; ++i) {
    if (!ctx.tracked(i)) continue;
    for (const auto& [id, c] : ctx.s.charts) {
      if ((ctx.world[i]->palm_pos - toggle_position(ctx.cfg, c, ctx.s.layout.at(id))).norm() <= ctx.cfg.suppress_radius_m) {
        return true;
      }
    }
  }
  return false;
}

inline void handle_travel(StepContext& ctx, bool can_initiate) {
  auto& s = ctx.s;
  const auto hit = gaze_target(ctx);
  const bool eligible =
      hit && (floor_of(ctx.head.position) - s.layout.at(*hit)).norm() >= ctx.cfg.faraway_min_m;
  if (!eligible) {
    s.gaze.reset();
  } else if (!s.gaze || s.gaze->chart_id != *hit) {
    s.gaze = GazeDwell{*hit, ctx.in.t_ms};
  }

  if (std::holds_alternative<TravelIdle>(s.travel)) {
    if (s.gaze && ctx.in.t_ms - s.gaze->since_ms >= ctx.cfg.gaze_dwell_ms) {
      s.travel = TravelArmed{s.gaze->chart_id, ctx.in.t_ms, false};
      const double distance = (floor_of(ctx.head.position) - s.layout.at(s.gaze->chart_id)).norm();
      ctx.emit(EventKind::TravelArmed, s.gaze->chart_id, Payload{{"distance_m", round4(distance)}});
    }
    return;
  }
  auto* armed = std::get_if<TravelArmed>(&s.travel);
  if (!armed) return;
  if (!s.gaze || s.gaze->chart_id != armed->chart_id) {
    s.travel = TravelIdle{};
    return;
  }
  const auto& chart = s.charts.at(armed->chart_id);
  const Vec2& center = s.layout.at(armed->chart_id);
  const Vec3 focus = chart_focus(ctx.cfg, chart, center);
  bool pointing = false;
  for (std::size_t i = 0; i < 2; ++i) {
    if (!ctx.tracked(i) || ctx.posture(i) != Posture::Point) continue;
    const HandFrame& f = *ctx.world[i];
    if (angle_between(index_direction(f), focus - f.palm_pos) <= deg_to_rad(ctx.cfg.point_tol_deg)) pointing = true;
  }
  if (!pointing) return;
  if (near_any_toggle(ctx)) {
    if (!armed->suppressed) {
      armed->suppressed = true;
      ctx.emit(EventKind::SuppressedTravel, armed->chart_id);
    }
    return;
  }
  if (!can_initiate || ctx.initiated) return;
  const std::string id = armed->chart_id;
  const Viewpoint to = landing_viewpoint(ctx.cfg, s.viewpoint, ctx.in.head, center);
  s.travel = TravelInTransit{id, s.viewpoint, to, ctx.in.t_ms};
  s.gaze.reset();
  ctx.emit(EventKind::TravelStarted, id,
           Payload{{"from", {round4(s.viewpoint.position.x()), round4(s.viewpoint.position.z())}},
                   {"to", {round4(to.position.x()), round4(to.position.z())}}});
  ctx.initiated = true;
}

}  // namespace detail

struct StepResult {
  EngineState state;
  std::vector<InteractionEvent> events;
};

/// Advances the world by one input sample.
inline StepResult step(EngineState state, const InputSample& sample, const EngineConfig& cfg = {}) {
  if (state.last_t_ms && sample.t_ms <= *state.last_t_ms) {
    throw EngineError(EngineErrc::NonMonotonicTime, "sample time " + std::to_string(sample.t_ms) +
                                                        " not after " + std::to_string(*state.last_t_ms));
  }
  StepResult out;
  detail::StepContext ctx{cfg, state, sample, out.events, 0, Pose{}, {}, {}, false};
  ctx.dt_ms = state.last_t_ms ? sample.t_ms - *state.last_t_ms : 0;
  state.last_t_ms = sample.t_ms;

  detail::update_postures(ctx);
  if (detail::handle_pause(ctx) || state.paused) {
    out.state = std::move(state);
    return out;
  }
  if (detail::advance_transit(ctx)) {
    out.state = std::move(state);
    return out;
  }
  detail::refresh_world(ctx);
  detail::advance_spins(ctx);

  const bool can_initiate = !state.busy();
  for (std::size_t i = 0; i < 2; ++i) {
    if (state.grasp[i] && !state.charts.count(grasp_chart(*state.grasp[i]))) state.grasp[i].reset();
  }
  detail::continue_grasps(ctx);
  if (state.range_gesture) detail::continue_range(ctx);
  if (state.zoom_gesture) detail::continue_zoom(ctx);

  detail::handle_reset(ctx, can_initiate);
  if (can_initiate && !ctx.initiated && !state.zoom_gesture) detail::start_zoom(ctx);
  if (can_initiate && !ctx.initiated) detail::start_range(ctx);
  if (can_initiate && !ctx.initiated) detail::start_grasp(ctx);
  detail::handle_mode_toggle(ctx, can_initiate);
  if (can_initiate) detail::handle_travel(ctx, can_initiate);

  out.state = std::move(state);
  return out;
}

// --- projection for clients --------------------------------------------------

struct ChartView {
  std::string id;
  ChartMode mode = ChartMode::Inactive;
  EventWindow window;
  int slice = 0;
  std::vector<int> arrangement;
  double yaw_deg = 0.0;
  std::optional<EventWindow> selected_range;
  std::optional<EventWindow> preview_range;
  bool outline = false;
  bool outside_semitransparent = false;
  std::optional<int> dragged_variable;
  bool drag_connected = true;

  bool operator==(const ChartView&) const = default;
};

struct HandView {
  bool left_tracked = false;
  bool right_tracked = false;
  bool semitransparent = false;
  bool operator==(const HandView&) const = default;
};

struct WorldView {
  std::int64_t t_ms = 0;
  std::map<std::string, ChartView> charts;
  Viewpoint viewpoint;
  bool paused = false;
  HandView hands;
};

inline ChartView chart_view(const EngineState& s, const std::string& id) {
  const auto& c = s.charts.at(id);
  ChartView v;
  v.id = id;
  v.mode = c.mode;
  v.window = c.visible_window;
  v.slice = c.slice_index;
  v.arrangement = c.arrangement;
  v.yaw_deg = detail::round4(rad_to_deg(c.yaw_rad));
  v.selected_range = c.selected_range;
  if (s.range_gesture && s.range_gesture->chart_id == id) v.preview_range = s.range_gesture->live;
  if (const auto* armed = std::get_if<TravelArmed>(&s.travel)) v.outline = armed->chart_id == id;
  v.outside_semitransparent = v.selected_range.has_value() || v.preview_range.has_value();
  for (const auto& g : s.grasp) {
    if (!g) continue;
    if (const auto* sphere = std::get_if<SphereGrasp>(&*g); sphere && sphere->chart_id == id) {
      v.dragged_variable = sphere->variable;
      v.drag_connected = sphere->connected;
    }
  }
  return v;
}

inline WorldView world_view(const EngineState& s) {
  WorldView w;
  w.t_ms = s.last_t_ms.value_or(0);
  for (const auto& [id, _] : s.charts) w.charts.emplace(id, chart_view(s, id));
  w.viewpoint = s.viewpoint;
  w.paused = s.paused;
  w.hands = {s.tracked[0], s.tracked[1], s.paused};
  return w;
}

}  // namespace gce
