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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tickbench/types.hpp"

namespace tickbench {

enum class ExecutionMode { kDirect, kFollow };
enum class PeerPrediction { kFrozen, kConstantVelocity };

/// Sensing and actuation imperfections applied by the executor. The shipped
/// presets are calibration knobs, not measured lab values.
struct DisturbanceProfile {
  double obs_position_noise_std = 0.0;  // m
  double obs_yaw_noise_std = 0.0;       // rad
  int actuation_delay = 0;              // ticks
  int localization_latency = 0;         // ticks
  bool enable_position_noise = true;
  bool enable_yaw_noise = true;
  bool enable_actuation_delay = true;
  bool enable_localization_latency = true;
  uint64_t noise_seed = 0;

  bool operator==(const DisturbanceProfile&) const = default;
};

/// Named presets: "sim", "twin", "lab". Throws ConfigError for other names.
DisturbanceProfile disturbance_preset(std::string_view name);

struct FollowerGains {
  double lookahead_time = 0.3;  // s
  double k_speed = 0.5;         // per (m/s) of speed error
  double k_along = 0.5;         // 1/s, per metre of along-track error
  /// Predict the vehicle forward over the observation age and the queued
  /// commands before tracking.
  bool delay_compensation = true;

  bool operator==(const FollowerGains&) const = default;
};

/// Initial pose of one agent. Either an explicit pose, or an arc length on
/// the reference path (pose taken from the path, optionally offset sideways).
struct Placement {
  std::string path;
  std::optional<double> arc_length;
  double lateral = 0.0;
  Vec2 position;
  double yaw = 0.0;
  double speed = 0.0;

  bool operator==(const Placement&) const = default;
};

struct RunConfig {
  double dt = 0.1;
  int steps = 180;
  int n_agent = 3;
  int H_c = 5;
  int H_p = 8;
  ExecutionMode mode = ExecutionMode::kDirect;
  DisturbanceProfile disturbance;
  uint64_t seed = 0;
  std::vector<Placement> placements;
  bool reset_on_collision = true;
  PeerPrediction peer_prediction = PeerPrediction::kConstantVelocity;
  FollowerGains follower;
  int substeps = 1;
  VehicleParams vehicle;

  /// Throws ConfigError on a violated constraint.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

/// Unset keys take the defaults above; unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& file);

DisturbanceProfile parse_disturbance(const nlohmann::json& doc);
/// Angles in radians, or degrees under "<key>_deg".
VehicleParams parse_vehicle(const nlohmann::json& doc);

nlohmann::json to_json(const VehicleParams& v);

nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const DisturbanceProfile& d);

std::string_view to_string(ExecutionMode mode);

}  // namespace tickbench
