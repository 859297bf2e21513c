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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Geometry>

namespace gce {

// World frame: +y is up, the floor is the x/z plane. A dataset's 2D entity
// position (x, y) lands on the floor at world (x, 0, y).
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline Vec3 world_up() { return Vec3::UnitY(); }

/// Wraps an angle into (-pi, pi].
inline double wrap_pi(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - kPi;
}

/// Wraps an angle into [0, 2pi).
inline double wrap_two_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

inline Vec2 floor_of(const Vec3& p) { return {p.x(), p.z()}; }
inline Vec3 on_floor(const Vec2& p, double height = 0.0) { return {p.x(), height, p.y()}; }

/// Azimuth of a floor-plane direction, atan2(z, x).
inline double azimuth(const Vec2& d) { return std::atan2(d.y(), d.x()); }

inline Vec2 from_azimuth(double a) { return {std::cos(a), std::sin(a)}; }

inline Quat yaw_rotation(double yaw) { return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitY())); }

/// Signed rotation about +y that carries floor direction `from` onto `to`.
inline double signed_yaw_between(const Vec2& from, const Vec2& to) {
  // from/to are (x, z); (f x g).y = f.z*g.x - f.x*g.z
  const double cross = from.y() * to.x() - from.x() * to.y();
  const double dot = from.dot(to);
  return std::atan2(cross, dot);
}

/// A rigid pose. Local -z is forward, +y is up, +x is right.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Vec3 forward() const { return orientation * Vec3(0.0, 0.0, -1.0); }
  Vec3 up() const { return orientation * Vec3::UnitY(); }
  Vec3 right() const { return orientation * Vec3::UnitX(); }
};

/// Pose whose forward axis points along `dir` while keeping +y as up
/// where possible. `dir` need not be normalized.
inline Pose look_along(const Vec3& position, const Vec3& dir) {
  const Vec3 f = dir.normalized();
  const double yaw = std::atan2(-f.x(), -f.z());
  const double pitch = std::asin(std::clamp(f.y(), -1.0, 1.0));
  Pose p;
  p.position = position;
  p.orientation = yaw_rotation(yaw) * Quat(Eigen::AngleAxisd(pitch, Vec3::UnitX()));
  p.orientation.normalize();
  return p;
}

/// Placement of the tracked play area in the world (target-based travel
/// moves this, not the tracked head).
struct Viewpoint {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;

  Vec3 to_world(const Vec3& local) const { return yaw_rotation(yaw) * local + position; }
  Vec3 dir_to_world(const Vec3& local) const { return yaw_rotation(yaw) * local; }
  Pose to_world(const Pose& local) const {
    return {to_world(local.position), (yaw_rotation(yaw) * local.orientation).normalized()};
  }
  bool operator==(const Viewpoint&) const = default;
};

/// Smallest distance between segments [p0,p1] and [q0,q1].
inline double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double eps = 1e-12;
  double s = 0.0;
  double t = 0.0;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + d1 * s) - (q0 + d2 * t)).norm();
}

/// Entry distance of a ray into a capped vertical cylinder, if it hits.
/// `dir` must be unit length.
inline std::optional<double> ray_cylinder(const Vec3& origin, const Vec3& dir, const Vec2& axis,
                                          double radius, double y0, double y1) {
  double t_lo = 0.0;
  double t_hi = std::numeric_limits<double>::infinity();

  const Vec2 o{origin.x() - axis.x(), origin.z() - axis.y()};
  const Vec2 d{dir.x(), dir.z()};
  const double a = d.squaredNorm();
  const double c = o.squaredNorm() - radius * radius;
  if (a < 1e-15) {
    if (c > 0.0) return std::nullopt;
  } else {
    const double b = o.dot(d);
    const double disc = b * b - a * c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    t_lo = std::max(t_lo, (-b - sq) / a);
    t_hi = std::min(t_hi, (-b + sq) / a);
  }

  if (std::abs(dir.y()) < 1e-15) {
    if (origin.y() < y0 || origin.y() > y1) return std::nullopt;
  } else {
    double ta = (y0 - origin.y()) / dir.y();
    double tb = (y1 - origin.y()) / dir.y();
    if (ta > tb) std::swap(ta, tb);
    t_lo = std::max(t_lo, ta);
    t_hi = std::min(t_hi, tb);
  }
  if (t_lo > t_hi) return std::nullopt;
  return t_lo;
}

/// Angle between two vectors, radians in [0, pi].
inline double angle_between(const Vec3& a, const Vec3& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::acos(std::clamp(a.dot(b) / (na * nb), -1.0, 1.0));
}

/// Cubic ease-in-out on [0, 1].
inline double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace gce
