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

#include "tickbench/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tickbench/dynamics.hpp"
#include "tickbench/errors.hpp"
#include "tickbench/geometry.hpp"

namespace tickbench {

ConstantPolicy::ConstantPolicy(double speed_fraction, double steering_fraction)
    : raw_{2.0 * speed_fraction - 1.0, steering_fraction} {
  if (!(speed_fraction > 0.0 && speed_fraction < 1.0) ||
      !(steering_fraction > -1.0 && steering_fraction < 1.0)) {
    throw std::invalid_argument("constant policy fractions must keep the action inside (-1, 1)");
  }
}

RawAction ConstantPolicy::act(const PolicyInput& /*input*/) const { return raw_; }

RawAction RandomPolicy::act(const PolicyInput& input) const {
  if (input.rng == nullptr) {
    throw PolicyError("random policy requires a random stream");
  }
  const double speed = input.rng->uniform(-0.99, 0.99);
  const double steering = input.rng->uniform(-0.99, 0.99);
  return {speed, steering};
}

double pursuit_steering(const Vec2& position, double yaw, const Vec2& target,
                        const VehicleParams& params) {
  const Vec2 rel = target - position;
  const double lookahead = rel.norm();
  if (lookahead <= 1e-12) {
    return 0.0;
  }
  const double alpha = wrap_angle(std::atan2(rel.y, rel.x) - yaw);
  const double steering = std::atan(2.0 * params.wheelbase * std::sin(alpha) / lookahead);
  return std::clamp(steering, -params.max_steering, params.max_steering);
}

PursuitResult pure_pursuit_act(const SigmaState& state, const ReferencePath& path, double lookahead,
                               double target_speed, const VehicleParams& params) {
  if (!(lookahead > 0.0)) {
    throw std::invalid_argument("pure pursuit lookahead must be positive");
  }
  const PolylineProjection proj =
      project_onto_polyline_heading(state.position, state.yaw, path.points);
  if (!path.closed && proj.arc_length >= path_length(path.points) - 1e-9) {
    return {{0.0, 0.0}, true};
  }
  const PathPose target = point_at_arc_length(path.points, proj.arc_length + lookahead, path.closed);
  return {{target_speed, pursuit_steering(state.position, state.yaw, target.position, params)},
          false};
}

PurePursuitPolicy::PurePursuitPolicy(VehicleParams params, double lookahead, double target_speed)
    : params_(params), lookahead_(lookahead), target_speed_(target_speed) {}

RawAction PurePursuitPolicy::act(const PolicyInput& input) const {
  if (input.reference_path == nullptr || input.ego_index >= input.states.size()) {
    throw PolicyError("pure pursuit needs the ego state and its reference path");
  }
  const PursuitResult r = pure_pursuit_act(input.states[input.ego_index], *input.reference_path,
                                           lookahead_, target_speed_, params_);
  return normalize_action(r.cmd, params_);
}

std::unique_ptr<Policy> make_policy(const std::string& name, const VehicleParams& params) {
  if (name == "constant") {
    return std::make_unique<ConstantPolicy>(0.75);
  }
  if (name == "pursuit") {
    return std::make_unique<PurePursuitPolicy>(params);
  }
  if (name == "random") {
    return std::make_unique<RandomPolicy>();
  }
  throw ConfigError("unknown policy '" + name + "'");
}

}  // namespace tickbench
