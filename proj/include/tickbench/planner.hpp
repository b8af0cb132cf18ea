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

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "tickbench/config.hpp"
#include "tickbench/map.hpp"
#include "tickbench/policy.hpp"
#include "tickbench/types.hpp"

namespace tickbench {

/// Reference trajectory over the prediction horizon: states[0] is the
/// current state and states[j + 1] follows from actions[j].
struct Trajectory {
  double t0 = 0.0;
  double dt = 0.1;
  std::vector<SigmaState> states;
  std::vector<ActionCmd> actions;

  bool operator==(const Trajectory&) const = default;
};

/// Steering for a rules-based step j in [H_c, H_p): linear from u_last
/// down to exactly 0 at j = H_p - 1. Throws std::out_of_range otherwise.
double taper_steering(double u_last, int j, int H_c, int H_p);

/// Everything the rollout needs besides the policy and ego index.
struct PlanContext {
  const MapModel* map = nullptr;
  std::span<const ReferencePath* const> reference_paths;  // per agent
  const RunConfig* cfg = nullptr;
  double t0 = 0.0;
};

/// Queries the policy for the first H_c steps, re-observing the predicted
/// scene each time, then holds speed and tapers steering until H_p.
Trajectory generate_trajectory(const Policy& policy, size_t ego_index,
                               std::span<const SigmaState> all_states, const PlanContext& ctx,
                               RandomStream& rng);

/// Re-integrates the actions from states[0].
std::vector<SigmaState> resimulate(const Trajectory& traj, const VehicleParams& params,
                                   int substeps = 1);

/// Scalar form of a trajectory sample, as carried on the wire.
struct TrajectoryPoint {
  Vec2 position;
  double yaw = 0.0;
  double speed = 0.0;
  double steering = 0.0;                 // rad
  std::optional<ActionCmd> action;       // command leaving this point
};

std::vector<TrajectoryPoint> to_points(const Trajectory& traj);
/// Throws ParseError when fewer than two points or an action is missing
/// anywhere but the last point (then recovered from the next point).
Trajectory from_points(double t0, double dt, std::span<const TrajectoryPoint> points,
                       const VehicleParams& params);

/// Passes a trajectory through its wire form. Apply once to a freshly
/// generated trajectory; the round trip is not idempotent to the last ulp.
Trajectory canonicalize(const Trajectory& traj, const VehicleParams& params);

/// {"t0","dt","points":[{"x","y","yaw","speed","steer","u_v","u_sigma"}...]}.
/// The action fields ride on every point except the last.
nlohmann::json trajectory_to_json(const Trajectory& traj, const VehicleParams& params);
/// Throws ParseError. Without action fields, actions are recovered from the
/// next point's speed and steering.
Trajectory trajectory_from_json(const nlohmann::json& doc, const VehicleParams& params);

}  // namespace tickbench
