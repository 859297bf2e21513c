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

// Head-mounted hand tracker model: depth-limited interaction zone, angular
// field of view, inter-hand occlusion along the sensor ray, a reacquisition
// latch after any drop, and optional seeded positional jitter.
//
// All coordinates are in the tracking space the head pose is expressed in;
// the sensor sits at the head position and looks along the head forward.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>

#include "gce/geometry.hpp"
#include "gce/hand.hpp"
#include "gce/splitmix.hpp"

namespace gce {

struct SensorModel {
  double min_depth_m = 0.10;
  double max_depth_m = 0.80;
  double fov_h_deg = 150.0;
  double fov_v_deg = 120.0;
  double occlusion_cone_deg = 10.0;
  double jitter_std_m = 0.0;
  int dropout_latch_frames = 3;

  void validate() const {
    if (!(0.0 < min_depth_m && min_depth_m < max_depth_m)) throw std::invalid_argument("sensor depth range");
    if (!(fov_h_deg > 0.0 && fov_h_deg <= 180.0 && fov_v_deg > 0.0 && fov_v_deg <= 180.0)) {
      throw std::invalid_argument("sensor field of view");
    }
    if (occlusion_cone_deg < 0.0) throw std::invalid_argument("occlusion cone");
    if (jitter_std_m < 0.0) throw std::invalid_argument("jitter");
    if (dropout_latch_frames < 0) throw std::invalid_argument("dropout latch");
  }
};

enum class DropReason { OutOfZone, OutOfFov, Occluded };

inline constexpr std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::OutOfZone: return "OutOfZone";
    case DropReason::OutOfFov: return "OutOfFov";
    case DropReason::Occluded: return "Occluded";
  }
  return "OutOfZone";
}

struct ObservedHand {
  std::optional<HandFrame> frame;
  std::optional<DropReason> drop_reason;

  bool tracked() const { return frame.has_value(); }
  bool operator==(const ObservedHand&) const = default;
};

/// Per-session tracker memory: reacquisition latches and the jitter stream.
struct TrackerState {
  struct Latch {
    int frames_left = 0;
    DropReason reason = DropReason::OutOfZone;
    bool operator==(const Latch&) const = default;
  };
  std::array<Latch, 2> latch{};
  SplitMix64 rng{0};

  static TrackerState seeded(std::uint64_t seed) {
    TrackerState s;
    s.rng = SplitMix64(seed);
    return s;
  }
  bool operator==(const TrackerState&) const = default;
};

namespace detail {
inline std::optional<DropReason> frustum_check(const SensorModel& model, const Pose& head, const Vec3& point) {
  const Vec3 rel = point - head.position;
  const double depth = rel.dot(head.forward());
  if (depth < model.min_depth_m || depth > model.max_depth_m) return DropReason::OutOfZone;
  const double h = std::atan2(std::abs(rel.dot(head.right())), depth);
  const double v = std::atan2(std::abs(rel.dot(head.up())), depth);
  if (h > deg_to_rad(0.5 * model.fov_h_deg) || v > deg_to_rad(0.5 * model.fov_v_deg)) return DropReason::OutOfFov;
  return std::nullopt;
}
}  // namespace detail

inline bool in_frustum(const SensorModel& model, const Pose& head, const Vec3& point) {
  return !detail::frustum_check(model, head, point).has_value();
}

struct Observation {
  ObservedHand left;
  ObservedHand right;
  TrackerState next;
};

/// One sensor sample. Absent input hands pass through as untracked with no
/// drop reason; the latch keeps a dropped hand dropped for
/// `dropout_latch_frames` samples after its geometry recovers.
inline Observation observe(const SensorModel& model, const TrackerState& state, const Pose& head,
                           const std::optional<HandFrame>& left, const std::optional<HandFrame>& right) {
  Observation out;
  out.next = state;
  const std::array<const std::optional<HandFrame>*, 2> input{&left, &right};

  std::array<std::optional<DropReason>, 2> geometric{};
  for (std::size_t i = 0; i < 2; ++i) {
    if (*input[i]) geometric[i] = detail::frustum_check(model, head, (*input[i])->palm_pos);
  }

  // Only the farther palm can be hidden, so at most one hand drops here.
  if (left && right) {
    const Vec3 to_l = left->palm_pos - head.position;
    const Vec3 to_r = right->palm_pos - head.position;
    if (angle_between(to_l, to_r) <= deg_to_rad(model.occlusion_cone_deg)) {
      const double dl = to_l.norm();
      const double dr = to_r.norm();
      if (dr < dl && !geometric[0]) geometric[0] = DropReason::Occluded;
      else if (dl < dr && !geometric[1]) geometric[1] = DropReason::Occluded;
    }
  }

  std::array<ObservedHand*, 2> hands{&out.left, &out.right};
  for (std::size_t i = 0; i < 2; ++i) {
    auto& latch = out.next.latch[i];
    if (!*input[i]) {
      latch = {};
      continue;
    }
    if (geometric[i]) {
      latch.frames_left = model.dropout_latch_frames;
      latch.reason = *geometric[i];
      hands[i]->drop_reason = *geometric[i];
      continue;
    }
    if (latch.frames_left > 0) {
      --latch.frames_left;
      hands[i]->drop_reason = latch.reason;
      continue;
    }
    HandFrame frame = **input[i];
    if (model.jitter_std_m > 0.0) {
      auto jitter = [&](Vec3& p) {
        for (int k = 0; k < 3; ++k) p[k] += model.jitter_std_m * out.next.rng.normal();
      };
      jitter(frame.palm_pos);
      for (auto& finger : frame.fingers) jitter(finger.tip);
    }
    hands[i]->frame = frame;
  }
  return out;
}

}  // namespace gce
