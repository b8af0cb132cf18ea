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

#include "tickbench/map.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tickbench/errors.hpp"
#include "tickbench/geometry.hpp"

namespace tickbench {

namespace {

constexpr double kJoinTolerance = 1e-6;
constexpr double kInsideTolerance = 1e-6;

Bounds bounds_of(const Polyline& ring) {
  Bounds b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
           {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (const Vec2& p : ring) {
    b.min.x = std::min(b.min.x, p.x);
    b.min.y = std::min(b.min.y, p.y);
    b.max.x = std::max(b.max.x, p.x);
    b.max.y = std::max(b.max.y, p.y);
  }
  return b;
}

bool inside_or_near(const Vec2& p, const Polyline& ring) {
  return point_in_polygon(p, ring) || distance_to_boundary(p, ring) <= kInsideTolerance;
}

void validate_lanelet(const Lanelet& l) {
  const std::string tag = "lanelet " + std::to_string(l.id);
  if (l.left.size() < 2 || l.right.size() < 2 || l.center.size() < 2) {
    throw ValidationError(tag + ": every polyline needs at least two points");
  }
  const Polyline ring = l.polygon();
  if (!polygon_is_simple(ring)) {
    throw ValidationError(tag + ": lane polygon is not simple");
  }
  for (size_t i = 0; i < l.center.size(); ++i) {
    if (!inside_or_near(l.center[i], ring)) {
      throw ValidationError(tag + ": centerline leaves the lane polygon");
    }
    if (i + 1 < l.center.size() && !inside_or_near((l.center[i] + l.center[i + 1]) * 0.5, ring)) {
      throw ValidationError(tag + ": centerline leaves the lane polygon");
    }
  }
  // A centerline segment may not cross the boundary between two inside vertices.
  for (size_t i = 0; i + 1 < l.center.size(); ++i) {
    for (size_t k = 0; k < ring.size(); ++k) {
      const Vec2& a = ring[k];
      const Vec2& b = ring[(k + 1) % ring.size()];
      if (segments_intersect(l.center[i], l.center[i + 1], a, b) &&
          distance_to_segment(l.center[i], a, b) > kInsideTolerance &&
          distance_to_segment(l.center[i + 1], a, b) > kInsideTolerance) {
        throw ValidationError(tag + ": centerline crosses the lane boundary");
      }
    }
  }
}

}  // namespace

Polyline Lanelet::polygon() const {
  Polyline ring = left;
  ring.insert(ring.end(), right.rbegin(), right.rend());
  return ring;
}

DrivableArea::DrivableArea(std::vector<Polyline> polygons) : polygons_(std::move(polygons)) {
  bounds_.reserve(polygons_.size());
  for (const Polyline& ring : polygons_) {
    bounds_.push_back(bounds_of(ring));
  }
}

MapModel::MapModel(std::vector<Lanelet> lanelets,
                   std::vector<std::pair<std::string, std::vector<int64_t>>> paths)
    : lanelets_(std::move(lanelets)) {
  for (size_t i = 0; i < lanelets_.size(); ++i) {
    if (!index_.emplace(lanelets_[i].id, i).second) {
      throw ValidationError("duplicate lanelet id " + std::to_string(lanelets_[i].id));
    }
  }
  std::vector<Polyline> polygons;
  for (const Lanelet& l : lanelets_) {
    validate_lanelet(l);
    for (int64_t succ : l.successors) {
      if (!index_.contains(succ)) {
        throw ValidationError("lanelet " + std::to_string(l.id) + ": dangling successor " +
                              std::to_string(succ));
      }
    }
    polygons.push_back(l.polygon());
  }
  area_ = DrivableArea(std::move(polygons));

  std::set<std::string> names;
  for (auto& [name, ids] : paths) {
    if (!names.insert(name).second) {
      throw ValidationError("duplicate reference path '" + name + "'");
    }
    if (ids.empty()) {
      throw ValidationError("reference path '" + name + "' is empty");
    }
    ReferencePath path;
    path.name = name;
    path.lanelet_ids = ids;
    for (size_t k = 0; k < ids.size(); ++k) {
      if (!index_.contains(ids[k])) {
        throw ValidationError("reference path '" + name + "': unknown lanelet " +
                              std::to_string(ids[k]));
      }
      const Lanelet& l = lanelet(ids[k]);
      if (k > 0) {
        const Lanelet& prev = lanelet(ids[k - 1]);
        if (std::find(prev.successors.begin(), prev.successors.end(), l.id) ==
                prev.successors.end() ||
            distance(prev.center.back(), l.center.front()) > kJoinTolerance) {
          throw ValidationError("reference path '" + name + "' is not connected at lanelet " +
                                std::to_string(l.id));
        }
      }
      auto first = l.center.begin();
      if (!path.points.empty()) {
        ++first;
      }
      path.points.insert(path.points.end(), first, l.center.end());
    }
    const Lanelet& head = lanelet(ids.front());
    const Lanelet& tail = lanelet(ids.back());
    path.closed = std::find(tail.successors.begin(), tail.successors.end(), head.id) !=
                      tail.successors.end() &&
                  distance(tail.center.back(), head.center.front()) <= kJoinTolerance;
    if (path.closed) {
      path.points.back() = path.points.front();
    }
    if (path_length(path.points) <= 0.0) {
      throw ValidationError("reference path '" + name + "' has zero length");
    }
    paths_.push_back(std::move(path));
  }
}

const Lanelet& MapModel::lanelet(int64_t id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw std::out_of_range("unknown lanelet " + std::to_string(id));
  }
  return lanelets_[it->second];
}

const ReferencePath& MapModel::reference_path(std::string_view name) const {
  for (const ReferencePath& p : paths_) {
    if (p.name == name) {
      return p;
    }
  }
  throw std::out_of_range("unknown reference path '" + std::string(name) + "'");
}

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

Polyline parse_polyline(const json& arr, std::string_view where) {
  if (!arr.is_array()) {
    throw ParseError(std::string(where) + ": expected an array of [x, y] points");
  }
  Polyline out;
  for (const json& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError(std::string(where) + ": expected [x, y] numeric pairs");
    }
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

json polyline_json(const Polyline& line) {
  json arr = json::array();
  for (const Vec2& p : line) {
    arr.push_back({p.x, p.y});
  }
  return arr;
}

}  // namespace

MapModel parse_map(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("map: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("lanelets") || !doc["lanelets"].is_array()) {
    throw ParseError("map: expected an object with a \"lanelets\" array");
  }
  check_keys(doc, {"lanelets", "reference_paths"}, "map");

  std::vector<Lanelet> lanelets;
  for (const json& jl : doc["lanelets"]) {
    if (!jl.is_object()) {
      throw ParseError("map: lanelet entries must be objects");
    }
    check_keys(jl, {"id", "left", "right", "center", "successors"}, "lanelet");
    for (const char* key : {"id", "left", "right", "center"}) {
      if (!jl.contains(key)) {
        throw ParseError(std::string("lanelet: missing \"") + key + "\"");
      }
    }
    if (!jl["id"].is_number_integer()) {
      throw ParseError("lanelet: id must be an integer");
    }
    Lanelet l;
    l.id = jl["id"].get<int64_t>();
    const std::string where = "lanelet " + std::to_string(l.id);
    l.left = parse_polyline(jl["left"], where);
    l.right = parse_polyline(jl["right"], where);
    l.center = parse_polyline(jl["center"], where);
    if (jl.contains("successors")) {
      if (!jl["successors"].is_array()) {
        throw ParseError(where + ": successors must be an array");
      }
      for (const json& s : jl["successors"]) {
        if (!s.is_number_integer()) {
          throw ParseError(where + ": successor ids must be integers");
        }
        l.successors.push_back(s.get<int64_t>());
      }
    }
    lanelets.push_back(std::move(l));
  }

  std::vector<std::pair<std::string, std::vector<int64_t>>> paths;
  if (doc.contains("reference_paths")) {
    if (!doc["reference_paths"].is_array()) {
      throw ParseError("map: reference_paths must be an array");
    }
    for (const json& jp : doc["reference_paths"]) {
      if (!jp.is_object() || !jp.contains("name") || !jp["name"].is_string() ||
          !jp.contains("lanelets") || !jp["lanelets"].is_array()) {
        throw ParseError("reference path: expected {\"name\", \"lanelets\"}");
      }
      check_keys(jp, {"name", "lanelets"}, "reference path");
      std::vector<int64_t> ids;
      for (const json& id : jp["lanelets"]) {
        if (!id.is_number_integer()) {
          throw ParseError("reference path: lanelet ids must be integers");
        }
        ids.push_back(id.get<int64_t>());
      }
      paths.emplace_back(jp["name"].get<std::string>(), std::move(ids));
    }
  }
  return MapModel(std::move(lanelets), std::move(paths));
}

MapModel load_map(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw ParseError("cannot open map file " + file.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_map(ss.str());
}

std::string serialize_map(const MapModel& map) {
  json doc;
  doc["lanelets"] = json::array();
  for (const Lanelet& l : map.lanelets()) {
    doc["lanelets"].push_back({{"id", l.id},
                               {"left", polyline_json(l.left)},
                               {"right", polyline_json(l.right)},
                               {"center", polyline_json(l.center)},
                               {"successors", l.successors}});
  }
  doc["reference_paths"] = json::array();
  for (const ReferencePath& p : map.reference_paths()) {
    doc["reference_paths"].push_back({{"name", p.name}, {"lanelets", p.lanelet_ids}});
  }
  return doc.dump();
}

std::string map_hash(const MapModel& map) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_map(map)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tickbench
