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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tickbench/types.hpp"

namespace tickbench {

struct Lanelet {
  int64_t id = 0;
  Polyline left;
  Polyline right;
  Polyline center;
  std::vector<int64_t> successors;

  /// Closed ring: left boundary followed by the reversed right boundary.
  Polyline polygon() const;

  bool operator==(const Lanelet&) const = default;
};

/// Axis-aligned bounds, used to prune polygon queries.
struct Bounds {
  Vec2 min;
  Vec2 max;

  bool contains(const Vec2& p, double margin = 0.0) const {
    return p.x >= min.x - margin && p.x <= max.x + margin && p.y >= min.y - margin &&
           p.y <= max.y + margin;
  }
};

/// Union of lane polygons. Stored as its components: membership and
/// distance queries over a union reduce exactly to min/any over the parts.
class DrivableArea {
 public:
  DrivableArea() = default;
  explicit DrivableArea(std::vector<Polyline> polygons);

  const std::vector<Polyline>& polygons() const { return polygons_; }
  const std::vector<Bounds>& bounds() const { return bounds_; }

 private:
  std::vector<Polyline> polygons_;
  std::vector<Bounds> bounds_;
};

struct ReferencePath {
  std::string name;
  std::vector<int64_t> lanelet_ids;
  Polyline points;  // concatenated centerlines, shared joints de-duplicated
  bool closed = false;

  bool operator==(const ReferencePath& o) const {
    return name == o.name && lanelet_ids == o.lanelet_ids && points == o.points &&
           closed == o.closed;
  }
};

class MapModel {
 public:
  MapModel() = default;
  MapModel(std::vector<Lanelet> lanelets,
           std::vector<std::pair<std::string, std::vector<int64_t>>> paths);

  const std::vector<Lanelet>& lanelets() const { return lanelets_; }
  const DrivableArea& drivable_area() const { return area_; }
  const std::vector<ReferencePath>& reference_paths() const { return paths_; }

  const Lanelet& lanelet(int64_t id) const;
  const ReferencePath& reference_path(std::string_view name) const;

  bool operator==(const MapModel& o) const {
    return lanelets_ == o.lanelets_ && paths_ == o.paths_;
  }

 private:
  std::vector<Lanelet> lanelets_;
  std::map<int64_t, size_t> index_;
  DrivableArea area_;
  std::vector<ReferencePath> paths_;
};

/// Parses and validates a map document. Throws ParseError or ValidationError.
MapModel parse_map(std::string_view json_text);
MapModel load_map(const std::filesystem::path& file);

std::string serialize_map(const MapModel& map);

/// FNV-1a 64 of the serialized map, as 16 lowercase hex digits.
std::string map_hash(const MapModel& map);

}  // namespace tickbench
