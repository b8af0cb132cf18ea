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

#include "tickbench/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tickbench/errors.hpp"

namespace tickbench {

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 fwd{std::cos(yaw), std::sin(yaw)};
  const Vec2 left{-fwd.y, fwd.x};
  const Vec2 f = fwd * half_length;
  const Vec2 l = left * half_width;
  return {center + f + l, center - f + l, center - f - l, center + f - l};
}

OrientedBox footprint(const SigmaState& state, const VehicleParams& params) {
  return {state.position, state.yaw, 0.5 * params.length, 0.5 * params.width};
}

namespace {

// Projected half extent of a box onto a unit axis.
double extent_on(const OrientedBox& b, const Vec2& axis) {
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  return b.half_length * std::abs(c * axis.x + s * axis.y) +
         b.half_width * std::abs(-s * axis.x + c * axis.y);
}

std::array<Vec2, 2> face_normals(const OrientedBox& b) {
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  return {Vec2{c, s}, Vec2{-s, c}};
}

}  // namespace

double signed_separation(const OrientedBox& a, const OrientedBox& b) {
  const Vec2 d = b.center - a.center;
  double max_gap = -std::numeric_limits<double>::infinity();
  const auto na = face_normals(a);
  const auto nb = face_normals(b);
  for (const auto* axes : {&na, &nb}) {
    for (const Vec2& axis : *axes) {
      const double gap = std::abs(dot(d, axis)) - (extent_on(a, axis) + extent_on(b, axis));
      max_gap = std::max(max_gap, gap);
    }
  }
  return max_gap;
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + ab * t);
}

namespace {

void check_polyline(std::span<const Vec2> polyline) {
  if (polyline.size() < 2) {
    throw GeometryError("polyline needs at least two points");
  }
}

PolylineProjection project_filtered(const Vec2& point, std::span<const Vec2> polyline,
                                    const Vec2* heading_dir) {
  PolylineProjection best;
  double best_d = std::numeric_limits<double>::infinity();
  double s_acc = 0.0;
  bool any = false;
  for (size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i];
    const Vec2 ab = polyline[i + 1] - a;
    const double len = ab.norm();
    if (len == 0.0) {
      continue;
    }
    if (heading_dir != nullptr && dot(ab, *heading_dir) <= 0.0) {
      s_acc += len;
      continue;
    }
    const double t = std::clamp(dot(point - a, ab) / (len * len), 0.0, 1.0);
    const Vec2 q = a + ab * t;
    const double d = distance(point, q);
    // Strict comparison keeps the smaller arc length on ties.
    if (d < best_d) {
      best_d = d;
      best.arc_length = s_acc + t * len;
      best.lateral_offset = d;
      best.segment_index = i;
      best.closest = q;
      const double c = cross(ab, point - q);
      best.side = d == 0.0 ? Side::kOn : (c > 0.0 ? Side::kLeft : (c < 0.0 ? Side::kRight : Side::kOn));
      any = true;
    }
    s_acc += len;
  }
  if (!any && heading_dir == nullptr) {
    throw GeometryError("polyline has zero length");
  }
  if (!any) {
    best.segment_index = std::numeric_limits<size_t>::max();
  }
  return best;
}

}  // namespace

PolylineProjection project_onto_polyline(const Vec2& point, std::span<const Vec2> polyline) {
  check_polyline(polyline);
  return project_filtered(point, polyline, nullptr);
}

PolylineProjection project_onto_polyline_heading(const Vec2& point, double heading,
                                                 std::span<const Vec2> polyline) {
  check_polyline(polyline);
  const Vec2 dir{std::cos(heading), std::sin(heading)};
  PolylineProjection p = project_filtered(point, polyline, &dir);
  if (p.segment_index == std::numeric_limits<size_t>::max()) {
    return project_filtered(point, polyline, nullptr);
  }
  return p;
}

double path_length(std::span<const Vec2> points) {
  double total = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    total += distance(points[i - 1], points[i]);
  }
  return total;
}

PathPose point_at_arc_length(std::span<const Vec2> polyline, double s, bool closed) {
  check_polyline(polyline);
  const double total = path_length(polyline);
  if (total <= 0.0) {
    throw GeometryError("polyline has zero length");
  }
  if (closed) {
    s = std::fmod(s, total);
    if (s < 0.0) {
      s += total;
    }
  } else {
    s = std::clamp(s, 0.0, total);
  }
  double acc = 0.0;
  for (size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 ab = polyline[i + 1] - polyline[i];
    const double len = ab.norm();
    if (len == 0.0) {
      continue;
    }
    if (s <= acc + len || i + 2 == polyline.size()) {
      const double t = std::clamp((s - acc) / len, 0.0, 1.0);
      return {polyline[i] + ab * t, std::atan2(ab.y, ab.x)};
    }
    acc += len;
  }
  const Vec2 ab = polyline.back() - polyline[polyline.size() - 2];
  return {polyline.back(), std::atan2(ab.y, ab.x)};
}

bool point_in_polygon(const Vec2& p, std::span<const Vec2> ring) {
  const size_t n = ring.size();
  if (n < 3) {
    return false;
  }
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    if (distance_to_segment(p, a, b) <= 1e-12) {
      return true;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) {
        inside = !inside;
      }
    }
  }
  return inside;
}

double distance_to_boundary(const Vec2& p, std::span<const Vec2> ring) {
  double best = std::numeric_limits<double>::infinity();
  const size_t n = ring.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    best = std::min(best, distance_to_segment(p, ring[j], ring[i]));
  }
  return best;
}

double distance_to_area(const Vec2& p, const DrivableArea& area) {
  const auto& polys = area.polygons();
  const auto& bounds = area.bounds();
  for (size_t k = 0; k < polys.size(); ++k) {
    if (bounds[k].contains(p) && point_in_polygon(p, polys[k])) {
      return 0.0;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < polys.size(); ++k) {
    // Lower bound from the bounding box lets us skip far polygons.
    const Bounds& b = bounds[k];
    const double dx = std::max({b.min.x - p.x, 0.0, p.x - b.max.x});
    const double dy = std::max({b.min.y - p.y, 0.0, p.y - b.max.y});
    if (std::hypot(dx, dy) >= best) {
      continue;
    }
    best = std::min(best, distance_to_boundary(p, polys[k]));
  }
  return best;
}

double lane_violation_depth(const OrientedBox& fp, const DrivableArea& area, double sample_step) {
  const auto c = fp.corners();
  double depth = 0.0;
  for (size_t e = 0; e < 4; ++e) {
    const Vec2 a = c[e];
    const Vec2 b = c[(e + 1) % 4];
    const double len = distance(a, b);
    const int n = std::max(2, static_cast<int>(std::ceil(len / sample_step)));
    const auto at = [&](double t) { return distance_to_area(a + (b - a) * t, area); };

    // n intervals; samples at i / n include both corners and, for even n,
    // the midpoint. An odd n gets the midpoint probed separately.
    double best_t = 0.0;
    double best = -1.0;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      const double d = at(t);
      if (d > best) {
        best = d;
        best_t = t;
      }
    }
    if (n % 2 == 1) {
      const double d = at(0.5);
      if (d > best) {
        best = d;
        best_t = 0.5;
      }
    }
    if (best > 0.0) {
      // Golden-section refinement within one sample spacing of the best.
      const double h = 1.0 / n;
      double lo = std::max(0.0, best_t - h);
      double hi = std::min(1.0, best_t + h);
      constexpr double kInvPhi = 0.6180339887498949;
      double x1 = hi - kInvPhi * (hi - lo);
      double x2 = lo + kInvPhi * (hi - lo);
      double f1 = at(x1);
      double f2 = at(x2);
      for (int it = 0; it < 30; ++it) {
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + kInvPhi * (hi - lo);
          f2 = at(x2);
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - kInvPhi * (hi - lo);
          f1 = at(x1);
        }
      }
      best = std::max({best, f1, f2});
    }
    depth = std::max(depth, best);
  }
  return depth;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v = cross(q - p, r - p);
    return (v > 0.0) - (v < 0.0);
  };
  const auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) && std::min(p.y, r.y) <= q.y &&
           q.y <= std::max(p.y, r.y);
  };
  const int o1 = orient(a, b, c);
  const int o2 = orient(a, b, d);
  const int o3 = orient(c, d, a);
  const int o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) {
    return true;
  }
  return (o1 == 0 && on_segment(a, c, b)) || (o2 == 0 && on_segment(a, d, b)) ||
         (o3 == 0 && on_segment(c, a, d)) || (o4 == 0 && on_segment(c, b, d));
}

bool polygon_is_simple(std::span<const Vec2> ring) {
  const size_t n = ring.size();
  if (n < 3) {
    return false;
  }
  for (size_t i = 0; i < n; ++i) {
    if (ring[i] == ring[(i + 1) % n]) {
      return false;
    }
  }
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    for (size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        continue;
      }
      if (segments_intersect(a, b, ring[j], ring[(j + 1) % n])) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace tickbench
