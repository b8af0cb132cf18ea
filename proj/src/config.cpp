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

#include "tickbench/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tickbench/errors.hpp"

namespace tickbench {

using nlohmann::json;

DisturbanceProfile disturbance_preset(std::string_view name) {
  DisturbanceProfile d;
  if (name == "sim") {
    return d;
  }
  if (name == "twin") {
    d.actuation_delay = 1;
    d.obs_position_noise_std = 0.002;
    return d;
  }
  if (name == "lab") {
    d.actuation_delay = 2;
    d.localization_latency = 1;
    d.obs_position_noise_std = 0.005;
    d.obs_yaw_noise_std = deg2rad(0.5);
    return d;
  }
  throw ConfigError("unknown disturbance preset '" + std::string(name) + "'");
}

std::string_view to_string(ExecutionMode mode) {
  return mode == ExecutionMode::kDirect ? "direct" : "follow";
}

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) {
    throw ParseError(std::string(where) + ": expected an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

double get_number(const json& obj, const char* key, std::string_view where) {
  if (!obj.at(key).is_number()) {
    throw ParseError(std::string(where) + ": \"" + key + "\" must be a number");
  }
  return obj.at(key).get<double>();
}

int64_t get_int(const json& obj, const char* key, std::string_view where) {
  if (!obj.at(key).is_number_integer()) {
    throw ParseError(std::string(where) + ": \"" + key + "\" must be an integer");
  }
  return obj.at(key).get<int64_t>();
}

uint64_t get_seed(const json& obj, const char* key, std::string_view where) {
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) {
    return v.get<uint64_t>();
  }
  if (v.is_number_integer() && v.get<int64_t>() >= 0) {
    return static_cast<uint64_t>(v.get<int64_t>());
  }
  throw ParseError(std::string(where) + ": \"" + key + "\" must be a non-negative integer");
}

bool get_bool(const json& obj, const char* key, std::string_view where) {
  if (!obj.at(key).is_boolean()) {
    throw ParseError(std::string(where) + ": \"" + key + "\" must be a boolean");
  }
  return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const char* key, std::string_view where) {
  if (!obj.at(key).is_string()) {
    throw ParseError(std::string(where) + ": \"" + key + "\" must be a string");
  }
  return obj.at(key).get<std::string>();
}

// Angles may be given in radians under `key` or in degrees under `key_deg`.
void read_angle(const json& obj, const std::string& key, double& out, std::string_view where) {
  const std::string deg_key = key + "_deg";
  const bool rad = obj.contains(key);
  const bool deg = obj.contains(deg_key);
  if (rad && deg) {
    throw ParseError(std::string(where) + ": give either \"" + key + "\" or \"" + deg_key + "\"");
  }
  if (rad) {
    out = get_number(obj, key.c_str(), where);
  } else if (deg) {
    out = deg2rad(get_number(obj, deg_key.c_str(), where));
  }
}

Placement parse_placement(const json& doc) {
  constexpr std::string_view where = "placement";
  check_keys(doc, {"path", "s", "lateral", "x", "y", "yaw", "yaw_deg", "speed"}, where);
  Placement p;
  if (doc.contains("path")) {
    p.path = get_string(doc, "path", where);
  }
  const bool has_s = doc.contains("s");
  const bool has_xy = doc.contains("x") || doc.contains("y");
  if (has_s == has_xy) {
    throw ParseError("placement: give either \"s\" (arc length on the path) or \"x\"/\"y\"");
  }
  if (has_s) {
    p.arc_length = get_number(doc, "s", where);
    if (doc.contains("lateral")) {
      p.lateral = get_number(doc, "lateral", where);
    }
    if (doc.contains("yaw") || doc.contains("yaw_deg")) {
      throw ParseError("placement: yaw comes from the path when \"s\" is given");
    }
  } else {
    if (!doc.contains("x") || !doc.contains("y")) {
      throw ParseError("placement: both \"x\" and \"y\" are required");
    }
    if (doc.contains("lateral")) {
      throw ParseError("placement: \"lateral\" only applies with \"s\"");
    }
    p.position = {get_number(doc, "x", where), get_number(doc, "y", where)};
    read_angle(doc, "yaw", p.yaw, where);
    p.yaw = wrap_angle(p.yaw);
  }
  if (doc.contains("speed")) {
    p.speed = get_number(doc, "speed", where);
  }
  return p;
}

FollowerGains parse_follower(const json& doc) {
  constexpr std::string_view where = "follower";
  check_keys(doc, {"lookahead_time", "k_speed", "k_along", "delay_compensation"},
             where);
  FollowerGains g;
  if (doc.contains("lookahead_time")) g.lookahead_time = get_number(doc, "lookahead_time", where);
  if (doc.contains("k_speed")) g.k_speed = get_number(doc, "k_speed", where);
  if (doc.contains("k_along")) g.k_along = get_number(doc, "k_along", where);
  if (doc.contains("delay_compensation")) {
    g.delay_compensation = get_bool(doc, "delay_compensation", where);
  }
  return g;
}

}  // namespace

VehicleParams parse_vehicle(const json& doc) {
  constexpr std::string_view where = "vehicle";
  check_keys(doc,
             {"length", "width", "wheelbase", "rear_wheelbase", "max_steering", "max_steering_deg",
              "max_steering_rate", "max_steering_rate_deg", "max_accel", "min_accel", "max_speed"},
             where);
  VehicleParams v;
  const auto num = [&](const char* key, double& out) {
    if (doc.contains(key)) {
      out = get_number(doc, key, where);
    }
  };
  num("length", v.length);
  num("width", v.width);
  num("wheelbase", v.wheelbase);
  num("rear_wheelbase", v.rear_wheelbase);
  read_angle(doc, "max_steering", v.max_steering, where);
  read_angle(doc, "max_steering_rate", v.max_steering_rate, where);
  num("max_accel", v.max_accel);
  num("min_accel", v.min_accel);
  num("max_speed", v.max_speed);
  return v;
}

json to_json(const VehicleParams& v) {
  return {{"length", v.length},
          {"width", v.width},
          {"wheelbase", v.wheelbase},
          {"rear_wheelbase", v.rear_wheelbase},
          {"max_steering", v.max_steering},
          {"max_steering_rate", v.max_steering_rate},
          {"max_accel", v.max_accel},
          {"min_accel", v.min_accel},
          {"max_speed", v.max_speed}};
}

DisturbanceProfile parse_disturbance(const json& doc) {
  constexpr std::string_view where = "disturbance";
  if (doc.is_string()) {
    return disturbance_preset(doc.get<std::string>());
  }
  check_keys(doc,
             {"preset", "obs_position_noise_std", "obs_yaw_noise_std", "obs_yaw_noise_std_deg",
              "actuation_delay", "localization_latency", "enable_position_noise",
              "enable_yaw_noise", "enable_actuation_delay", "enable_localization_latency",
              "noise_seed"},
             where);
  DisturbanceProfile d;
  if (doc.contains("preset")) {
    d = disturbance_preset(get_string(doc, "preset", where));
  }
  if (doc.contains("obs_position_noise_std")) {
    d.obs_position_noise_std = get_number(doc, "obs_position_noise_std", where);
  }
  read_angle(doc, "obs_yaw_noise_std", d.obs_yaw_noise_std, where);
  if (doc.contains("actuation_delay")) {
    d.actuation_delay = static_cast<int>(get_int(doc, "actuation_delay", where));
  }
  if (doc.contains("localization_latency")) {
    d.localization_latency = static_cast<int>(get_int(doc, "localization_latency", where));
  }
  if (doc.contains("enable_position_noise")) {
    d.enable_position_noise = get_bool(doc, "enable_position_noise", where);
  }
  if (doc.contains("enable_yaw_noise")) {
    d.enable_yaw_noise = get_bool(doc, "enable_yaw_noise", where);
  }
  if (doc.contains("enable_actuation_delay")) {
    d.enable_actuation_delay = get_bool(doc, "enable_actuation_delay", where);
  }
  if (doc.contains("enable_localization_latency")) {
    d.enable_localization_latency = get_bool(doc, "enable_localization_latency", where);
  }
  if (doc.contains("noise_seed")) {
    d.noise_seed = get_seed(doc, "noise_seed", where);
  }
  return d;
}

void RunConfig::validate() const {
  if (!(dt > 0.0)) {
    throw ConfigError("dt must be positive");
  }
  if (steps < 1) {
    throw ConfigError("steps must be at least 1");
  }
  if (n_agent < 1) {
    throw ConfigError("n_agent must be at least 1");
  }
  if (H_c < 1 || H_c > H_p) {
    throw ConfigError("horizons require 1 <= H_c <= H_p");
  }
  if (substeps < 1) {
    throw ConfigError("substeps must be at least 1");
  }
  if (!placements.empty() && placements.size() != static_cast<size_t>(n_agent)) {
    throw ConfigError("placements must list exactly n_agent entries");
  }
  for (const Placement& p : placements) {
    if (p.speed < 0.0) {
      throw ConfigError("placement speed must be non-negative");
    }
  }
  if (disturbance.obs_position_noise_std < 0.0 || disturbance.obs_yaw_noise_std < 0.0) {
    throw ConfigError("noise standard deviations must be non-negative");
  }
  if (disturbance.actuation_delay < 0 || disturbance.localization_latency < 0) {
    throw ConfigError("delays must be non-negative");
  }
  if (!(follower.lookahead_time > 0.0) || follower.k_speed < 0.0 || follower.k_along < 0.0) {
    throw ConfigError("follower gains must be non-negative with a positive lookahead time");
  }
  if (mode == ExecutionMode::kFollow && follower.delay_compensation) {
    const int age = (disturbance.enable_actuation_delay ? disturbance.actuation_delay : 0) +
                    (disturbance.enable_localization_latency ? disturbance.localization_latency : 0);
    if (age >= H_p) {
      throw ConfigError("delay compensation needs actuation_delay + localization_latency < H_p");
    }
  }
  vehicle.validate();
}

RunConfig parse_config(const json& doc) {
  constexpr std::string_view where = "config";
  check_keys(doc,
             {"dt", "steps", "n_agent", "H_c", "H_p", "mode", "disturbance", "seed", "placements",
              "reset_on_collision", "peer_prediction", "follower", "substeps", "vehicle"},
             where);
  RunConfig cfg;
  if (doc.contains("dt")) cfg.dt = get_number(doc, "dt", where);
  if (doc.contains("steps")) cfg.steps = static_cast<int>(get_int(doc, "steps", where));
  if (doc.contains("n_agent")) cfg.n_agent = static_cast<int>(get_int(doc, "n_agent", where));
  if (doc.contains("H_c")) cfg.H_c = static_cast<int>(get_int(doc, "H_c", where));
  if (doc.contains("H_p")) cfg.H_p = static_cast<int>(get_int(doc, "H_p", where));
  if (doc.contains("mode")) {
    const std::string mode = get_string(doc, "mode", where);
    if (mode == "direct") {
      cfg.mode = ExecutionMode::kDirect;
    } else if (mode == "follow") {
      cfg.mode = ExecutionMode::kFollow;
    } else {
      throw ParseError("config: mode must be \"direct\" or \"follow\"");
    }
  }
  if (doc.contains("disturbance")) cfg.disturbance = parse_disturbance(doc["disturbance"]);
  if (doc.contains("seed")) cfg.seed = get_seed(doc, "seed", where);
  if (doc.contains("placements")) {
    if (!doc["placements"].is_array()) {
      throw ParseError("config: placements must be an array");
    }
    for (const json& p : doc["placements"]) {
      cfg.placements.push_back(parse_placement(p));
    }
    if (!doc.contains("n_agent") && !cfg.placements.empty()) {
      cfg.n_agent = static_cast<int>(cfg.placements.size());
    }
  }
  if (doc.contains("reset_on_collision")) {
    cfg.reset_on_collision = get_bool(doc, "reset_on_collision", where);
  }
  if (doc.contains("peer_prediction")) {
    const std::string mode = get_string(doc, "peer_prediction", where);
    if (mode == "frozen") {
      cfg.peer_prediction = PeerPrediction::kFrozen;
    } else if (mode == "constant-velocity") {
      cfg.peer_prediction = PeerPrediction::kConstantVelocity;
    } else {
      throw ParseError("config: peer_prediction must be \"frozen\" or \"constant-velocity\"");
    }
  }
  if (doc.contains("follower")) cfg.follower = parse_follower(doc["follower"]);
  if (doc.contains("substeps")) cfg.substeps = static_cast<int>(get_int(doc, "substeps", where));
  if (doc.contains("vehicle")) cfg.vehicle = parse_vehicle(doc["vehicle"]);
  cfg.validate();
  return cfg;
}

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw ParseError("cannot open config file " + file.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return parse_config(std::string_view(text));
}

json to_json(const DisturbanceProfile& d) {
  return {{"obs_position_noise_std", d.obs_position_noise_std},
          {"obs_yaw_noise_std", d.obs_yaw_noise_std},
          {"actuation_delay", d.actuation_delay},
          {"localization_latency", d.localization_latency},
          {"enable_position_noise", d.enable_position_noise},
          {"enable_yaw_noise", d.enable_yaw_noise},
          {"enable_actuation_delay", d.enable_actuation_delay},
          {"enable_localization_latency", d.enable_localization_latency},
          {"noise_seed", d.noise_seed}};
}

json to_json(const RunConfig& cfg) {
  json placements = json::array();
  for (const Placement& p : cfg.placements) {
    json jp;
    if (!p.path.empty()) {
      jp["path"] = p.path;
    }
    if (p.arc_length) {
      jp["s"] = *p.arc_length;
      jp["lateral"] = p.lateral;
    } else {
      jp["x"] = p.position.x;
      jp["y"] = p.position.y;
      jp["yaw"] = p.yaw;
    }
    jp["speed"] = p.speed;
    placements.push_back(std::move(jp));
  }
  return {{"dt", cfg.dt},
          {"steps", cfg.steps},
          {"n_agent", cfg.n_agent},
          {"H_c", cfg.H_c},
          {"H_p", cfg.H_p},
          {"mode", std::string(to_string(cfg.mode))},
          {"disturbance", to_json(cfg.disturbance)},
          {"seed", cfg.seed},
          {"placements", std::move(placements)},
          {"reset_on_collision", cfg.reset_on_collision},
          {"peer_prediction",
           cfg.peer_prediction == PeerPrediction::kFrozen ? "frozen" : "constant-velocity"},
          {"follower",
           {{"lookahead_time", cfg.follower.lookahead_time},
            {"k_speed", cfg.follower.k_speed},
            {"k_along", cfg.follower.k_along},
            {"delay_compensation", cfg.follower.delay_compensation}}},
          {"substeps", cfg.substeps},
          {"vehicle", to_json(cfg.vehicle)}};
}

}  // namespace tickbench
