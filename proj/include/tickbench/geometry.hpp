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

#include <array>
#include <optional>
#include <span>

#include "tickbench/map.hpp"
#include "tickbench/types.hpp"

namespace tickbench {

struct OrientedBox {
  Vec2 center;
  double yaw = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;

  /// Counter-clockwise starting at front-left.
  std::array<Vec2, 4> corners() const;
};

OrientedBox footprint(const SigmaState& state, const VehicleParams& params);

/// Separating-axis test over the four face normals. Negative (the minimum
/// translation depth) when the boxes overlap, positive gap otherwise.
double signed_separation(const OrientedBox& a, const OrientedBox& b);

enum class Side { kLeft, kRight, kOn };

struct PolylineProjection {
  double arc_length = 0.0;
  double lateral_offset = 0.0;
  Side side = Side::kOn;
  size_t segment_index = 0;
  Vec2 closest;
};

/// Closest point on the polyline. Ties go to the smaller arc length.
/// Throws GeometryError for a polyline shorter than two points or of zero length.
PolylineProjection project_onto_polyline(const Vec2& point, std::span<const Vec2> polyline);

/// Same as project_onto_polyline but only considers segments whose direction
/// is within 90 degrees of `heading`; falls back to the plain projection when
/// none qualifies. Disambiguates self-crossing paths.
PolylineProjection project_onto_polyline_heading(const Vec2& point, double heading,
                                                 std::span<const Vec2> polyline);

struct PathPose {
  Vec2 position;
  double heading = 0.0;
};

/// Point at arc length `s`, clamped to [0, length] (wrapped when `closed`).
PathPose point_at_arc_length(std::span<const Vec2> polyline, double s, bool closed = false);

double path_length(std::span<const Vec2> points);

/// Even-odd test; points on the boundary count as inside.
bool point_in_polygon(const Vec2& p, std::span<const Vec2> ring);

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);

/// Distance from `p` to the ring's boundary edges.
double distance_to_boundary(const Vec2& p, std::span<const Vec2> ring);

/// 0 inside the area, Euclidean distance to the area otherwise.
double distance_to_area(const Vec2& p, const DrivableArea& area);

/// Largest distance by which the footprint's perimeter leaves the area.
/// Probes corners and edge midpoints, samples the perimeter at `sample_step`
/// and refines around the largest sample.
double lane_violation_depth(const OrientedBox& fp, const DrivableArea& area,
                            double sample_step = 0.005);

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// True when no two non-adjacent edges of the closed ring touch.
bool polygon_is_simple(std::span<const Vec2> ring);

}  // namespace tickbench
