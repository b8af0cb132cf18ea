// Copyright 2026 The tickbench Authors
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

#include <cmath>
#include <numbers>
#include <vector>

namespace tickbench {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

using Polyline = std::vector<Vec2>;

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle into [-pi, pi]. Values already in range are returned unchanged.
inline double wrap_angle(double a) {
  if (a >= -std::numbers::pi && a <= std::numbers::pi) {
    return a;
  }
  double w = std::remainder(a, 2.0 * std::numbers::pi);
  if (w < -std::numbers::pi) {
    w = -std::numbers::pi;
  } else if (w > std::numbers::pi) {
    w = std::numbers::pi;
  }
  return w;
}

/// Geometry and actuation limits of the scaled vehicle.
struct VehicleParams {
  double length = 0.22;
  double width = 0.107;
  double wheelbase = 0.15;
  double rear_wheelbase = 0.075;
  double max_steering = deg2rad(31.0);
  double max_steering_rate = deg2rad(90.0);
  double max_accel = 5.0;
  double min_accel = -5.0;
  double max_speed = 1.0;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  bool operator==(const VehicleParams&) const = default;
};

/// State as reported by the lab's state list: scalar speed and steering
/// normalized to [-1, 1].
struct CpmState {
  Vec2 position;
  double yaw = 0.0;
  double speed = 0.0;
  double steering_normalized = 0.0;

  bool operator==(const CpmState&) const = default;
};

/// State in the planner's internal representation: global-frame velocity
/// vector and steering angle in radians.
struct SigmaState {
  Vec2 position;
  double yaw = 0.0;
  Vec2 velocity;
  double steering = 0.0;

  double speed() const { return velocity.norm(); }

  bool operator==(const SigmaState&) const = default;
};

struct ActionCmd {
  double speed = 0.0;     // m/s
  double steering = 0.0;  // rad

  bool operator==(const ActionCmd&) const = default;
};

/// Squashed policy output, both components in (-1, 1).
struct RawAction {
  double speed = 0.0;
  double steering = 0.0;

  bool operator==(const RawAction&) const = default;
};

}  // namespace tickbench
