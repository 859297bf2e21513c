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

// Hand skeleton frames and their classification into the postures the
// gesture set is built from (pinch, grab, point, open "stop", index up),
// plus the two-hand relations used by zoom and reset.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gce/geometry.hpp"

namespace gce {

enum class HandSide { Left = 0, Right = 1 };

inline constexpr std::string_view to_string(HandSide s) { return s == HandSide::Left ? "left" : "right"; }
inline constexpr HandSide other(HandSide s) { return s == HandSide::Left ? HandSide::Right : HandSide::Left; }
inline constexpr std::size_t index_of(HandSide s) { return static_cast<std::size_t>(s); }

enum Finger : std::size_t { kThumb = 0, kIndex = 1, kMiddle = 2, kRing = 3, kPinky = 4 };

struct FingerSample {
  Vec3 tip = Vec3::Zero();
  double curl = 0.0;  // 0 extended, 1 fully curled

  bool operator==(const FingerSample&) const = default;
};

/// Minimal hand skeleton: palm pose plus fingertips and curls, thumb..pinky.
struct HandFrame {
  HandSide side = HandSide::Right;
  Vec3 palm_pos = Vec3::Zero();
  Vec3 palm_normal = Vec3(0.0, 0.0, -1.0);  // out of the palm
  Vec3 palm_dir = Vec3::UnitY();            // wrist -> fingers
  std::array<FingerSample, 5> fingers{};
  std::int64_t t_ms = 0;

  bool operator==(const HandFrame&) const = default;
};

/// Frame re-expressed in the world through a viewpoint.
inline HandFrame to_world(const HandFrame& f, const Viewpoint& vp) {
  HandFrame w = f;
  w.palm_pos = vp.to_world(f.palm_pos);
  w.palm_normal = vp.dir_to_world(f.palm_normal);
  w.palm_dir = vp.dir_to_world(f.palm_dir);
  for (auto& finger : w.fingers) finger.tip = vp.to_world(finger.tip);
  return w;
}

class MalformedFrame : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void validate(const HandFrame& f) {
  auto finite = [](const Vec3& v) { return v.allFinite(); };
  if (!finite(f.palm_pos) || !finite(f.palm_normal) || !finite(f.palm_dir)) {
    throw MalformedFrame("non-finite palm pose");
  }
  if (std::abs(f.palm_normal.norm() - 1.0) > 1e-6) throw MalformedFrame("palm normal is not unit length");
  if (std::abs(f.palm_dir.norm() - 1.0) > 1e-6) throw MalformedFrame("palm direction is not unit length");
  for (const auto& finger : f.fingers) {
    if (!finite(finger.tip)) throw MalformedFrame("non-finite fingertip");
    if (!(finger.curl >= 0.0 && finger.curl <= 1.0)) throw MalformedFrame("curl outside [0, 1]");
  }
}

enum class Posture { None, Pinch, Grab, Point, OpenStop, IndexUp };

inline constexpr std::string_view to_string(Posture p) {
  switch (p) {
    case Posture::None: return "None";
    case Posture::Pinch: return "Pinch";
    case Posture::Grab: return "Grab";
    case Posture::Point: return "Point";
    case Posture::OpenStop: return "OpenStop";
    case Posture::IndexUp: return "IndexUp";
  }
  return "None";
}

struct PostureConfig {
  double pinch_engage_m = 0.025;
  double pinch_release_m = 0.035;
  double grab_engage_curl = 0.7;   // mean curl, index..pinky
  double grab_release_curl = 0.5;
  double point_index_max_curl = 0.2;
  double point_others_min_curl = 0.6;
  double open_max_curl = 0.2;
  double open_forward_min_dot = 0.6;
  double index_up_min_dot = 0.8;
  int debounce_frames = 2;
};

struct PostureState {
  Posture posture = Posture::None;
  std::optional<Vec3> pinch_point;
  std::optional<Vec3> grab_point;
  std::int64_t since_ms = 0;
  // candidate waiting out the debounce
  Posture pending = Posture::None;
  int pending_frames = 0;

  bool operator==(const PostureState&) const = default;
};

inline Vec3 pinch_point(const HandFrame& f) {
  return 0.5 * (f.fingers[kThumb].tip + f.fingers[kIndex].tip);
}

inline Vec3 grab_point(const HandFrame& f) {
  Vec3 sum = Vec3::Zero();
  for (const auto& finger : f.fingers) sum += finger.tip;
  return sum / 5.0;
}

/// Direction from the palm to the index fingertip.
inline Vec3 index_direction(const HandFrame& f) {
  const Vec3 d = f.fingers[kIndex].tip - f.palm_pos;
  const double n = d.norm();
  return n > 0.0 ? Vec3(d / n) : f.palm_dir;
}

inline double pinch_distance(const HandFrame& f) {
  return (f.fingers[kThumb].tip - f.fingers[kIndex].tip).norm();
}

inline double mean_finger_curl(const HandFrame& f) {
  return (f.fingers[kIndex].curl + f.fingers[kMiddle].curl + f.fingers[kRing].curl + f.fingers[kPinky].curl) /
         4.0;
}

namespace detail {

inline bool point_shape(const HandFrame& f, const PostureConfig& cfg) {
  return f.fingers[kIndex].curl <= cfg.point_index_max_curl && f.fingers[kMiddle].curl >= cfg.point_others_min_curl &&
         f.fingers[kRing].curl >= cfg.point_others_min_curl && f.fingers[kPinky].curl >= cfg.point_others_min_curl;
}

inline bool index_points_up(const HandFrame& f, const PostureConfig& cfg) {
  return index_direction(f).dot(world_up()) >= cfg.index_up_min_dot;
}

/// One pass over the priority list; the posture already held is tested
/// against its release threshold, every other one against engage.
inline Posture raw_posture(const HandFrame& f, Posture held, const Vec3& torso_forward, const PostureConfig& cfg) {
  const double pinch_limit = held == Posture::Pinch ? cfg.pinch_release_m : cfg.pinch_engage_m;
  if (pinch_distance(f) <= pinch_limit) return Posture::Pinch;

  // An extended index finger never counts as a grasp.
  const double grab_limit = held == Posture::Grab ? cfg.grab_release_curl : cfg.grab_engage_curl;
  if (mean_finger_curl(f) >= grab_limit && f.fingers[kIndex].curl > cfg.point_index_max_curl) return Posture::Grab;

  const bool pointing = point_shape(f, cfg);
  if (pointing && !index_points_up(f, cfg)) return Posture::Point;

  bool open = true;
  for (const auto& finger : f.fingers) open = open && finger.curl <= cfg.open_max_curl;
  if (open && f.palm_normal.dot(torso_forward) >= cfg.open_forward_min_dot) return Posture::OpenStop;

  if (pointing) return Posture::IndexUp;
  return Posture::None;
}

inline void fill_points(PostureState& s, const HandFrame& f) {
  s.pinch_point = s.posture == Posture::Pinch ? std::optional<Vec3>(pinch_point(f)) : std::nullopt;
  s.grab_point = s.posture == Posture::Grab ? std::optional<Vec3>(grab_point(f)) : std::nullopt;
}

}  // namespace detail

/// Hysteretic, debounced posture classification. A new posture (including
/// None) must be observed on `debounce_frames` consecutive frames before it
/// replaces the held one.
///
/// `torso_forward` is the horizontal facing direction in the frame's
/// coordinate system; it decides whether an open hand faces forward.
inline PostureState classify_posture(const HandFrame& frame, const PostureState& prev, const PostureConfig& cfg = {},
                                     const Vec3& torso_forward = Vec3(0.0, 0.0, -1.0)) {
  validate(frame);
  const Posture raw = detail::raw_posture(frame, prev.posture, torso_forward, cfg);

  PostureState next = prev;
  if (raw == prev.posture) {
    next.pending = raw;
    next.pending_frames = 0;
  } else {
    next.pending_frames = raw == prev.pending ? prev.pending_frames + 1 : 1;
    next.pending = raw;
    if (next.pending_frames >= cfg.debounce_frames) {
      next.posture = raw;
      next.since_ms = frame.t_ms;
      next.pending_frames = 0;
    }
  }
  detail::fill_points(next, frame);
  return next;
}

/// Posture state for a hand the tracker lost.
inline PostureState untracked_posture(const PostureState& prev, std::int64_t t_ms) {
  PostureState next;
  next.since_ms = prev.posture == Posture::None ? prev.since_ms : t_ms;
  return next;
}

/// True iff `posture` has been held continuously for at least `required_ms`.
inline bool hold_timer(const PostureState& state, Posture posture, std::int64_t required_ms, std::int64_t now_ms) {
  return state.posture == posture && now_ms - state.since_ms >= required_ms;
}

struct BimanualConfig {
  double facing_max_dot = -0.8;
  double stacked_max_horizontal_m = 0.12;
  double stacked_min_vertical_m = 0.05;
  double crossed_max_tilt_deg = 80.0;
  double crossed_max_gap_m = 0.02;
  double crossed_min_angle_deg = 20.0;
  double crossed_max_angle_deg = 90.0;
  std::int64_t max_skew_ms = 12;
};

struct BimanualRelation {
  bool palms_facing = false;
  double separation_m = 0.0;
  bool vertical_stacked = false;
  bool indices_crossed = false;
};

class TimestampSkew : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline BimanualRelation bimanual_relation(const HandFrame& left, const HandFrame& right,
                                          const BimanualConfig& cfg = {}) {
  validate(left);
  validate(right);
  if (std::abs(left.t_ms - right.t_ms) > cfg.max_skew_ms) throw TimestampSkew("hand frames too far apart in time");

  BimanualRelation r;
  r.palms_facing = left.palm_normal.dot(right.palm_normal) <= cfg.facing_max_dot;
  const Vec3 offset = right.palm_pos - left.palm_pos;
  r.separation_m = offset.norm();
  const double horizontal = Vec2(offset.x(), offset.z()).norm();
  r.vertical_stacked = horizontal <= cfg.stacked_max_horizontal_m && std::abs(offset.y()) >= cfg.stacked_min_vertical_m;

  const Vec3 dl = index_direction(left);
  const Vec3 dr = index_direction(right);
  const double max_tilt = deg_to_rad(cfg.crossed_max_tilt_deg);
  const bool upright = angle_between(dl, world_up()) <= max_tilt && angle_between(dr, world_up()) <= max_tilt;
  const double gap = segment_distance(left.palm_pos, left.fingers[kIndex].tip, right.palm_pos, right.fingers[kIndex].tip);
  const double cross_angle = angle_between(dl, dr);
  r.indices_crossed = upright && gap <= cfg.crossed_max_gap_m && cross_angle >= deg_to_rad(cfg.crossed_min_angle_deg) &&
                      cross_angle <= deg_to_rad(cfg.crossed_max_angle_deg);
  return r;
}

/// Comfort codes per gesture, carried as catalog metadata only.
struct GestureCatalogEntry {
  std::string_view feature;
  std::string_view postures;
  std::string_view comfort;
};

inline constexpr std::array<GestureCatalogEntry, 11> kGestureCatalog{{
    {"Travel", "Point", "5c"},
    {"Mode Toggle", "touch", "1c, 5c, 9c"},
    {"Rotation", "Grab", "2c, 10c"},
    {"Data Variable Sort", "Grab", "2c"},
    {"Data Variable Filter", "Grab", "2c"},
    {"Time Event Selection", "Grab", "2c"},
    {"Time Range Selection", "Pinch + Pinch", "2c + 2c"},
    {"Zoom in", "palms facing, apart", "11u + 12u"},
    {"Zoom out", "palms facing, together", "11u + 12u"},
    {"Reset", "IndexUp + IndexUp, crossed", "5c and 3u"},
    {"Pause/Resume", "OpenStop + OpenStop", "3u + 3u"},
}};

}  // namespace gce
