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

#include "tickbench/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tickbench {

double slip_angle(double steering, const VehicleParams& params) {
  return std::atan(params.rear_wheelbase / params.wheelbase * std::tan(steering));
}

SigmaState map_cpm_to_sigma(const CpmState& s, const VehicleParams& params) {
  SigmaState out;
  out.position = s.position;
  out.yaw = wrap_angle(s.yaw);
  out.steering = params.max_steering * s.steering_normalized;
  const double heading = out.yaw + slip_angle(out.steering, params);
  out.velocity = {s.speed * std::cos(heading), s.speed * std::sin(heading)};
  return out;
}

CpmState map_sigma_to_cpm(const SigmaState& s, const VehicleParams& params) {
  return {s.position, wrap_angle(s.yaw), s.speed(), s.steering / params.max_steering};
}

ActionCmd limit_command(const SigmaState& s, const ActionCmd& cmd, double dt,
                        const VehicleParams& params) {
  // Rate limit first, then the absolute steering limit.
  const double max_delta = params.max_steering_rate * dt;
  double steering = std::clamp(cmd.steering, s.steering - max_delta, s.steering + max_delta);
  steering = std::clamp(steering, -params.max_steering, params.max_steering);

  const double v = s.speed();
  double speed = std::clamp(cmd.speed, v + params.min_accel * dt, v + params.max_accel * dt);
  speed = std::clamp(speed, 0.0, params.max_speed);
  return {speed, steering};
}

SigmaState step_bicycle(const SigmaState& s, const ActionCmd& cmd, double dt,
                        const VehicleParams& params, int substeps) {
  const ActionCmd applied = limit_command(s, cmd, dt, params);
  const double beta = slip_angle(applied.steering, params);
  const double yaw_rate = applied.speed / params.rear_wheelbase * std::sin(beta);
  const int n = std::max(1, substeps);
  const double h = dt / n;

  SigmaState out = s;
  for (int k = 0; k < n; ++k) {
    const double heading = out.yaw + beta;
    out.position = out.position + Vec2{std::cos(heading), std::sin(heading)} * (applied.speed * h);
    out.yaw = wrap_angle(out.yaw + yaw_rate * h);
  }
  const double heading = out.yaw + beta;
  out.velocity = {applied.speed * std::cos(heading), applied.speed * std::sin(heading)};
  out.steering = applied.steering;
  return out;
}

ActionCmd rescale_action(const RawAction& raw, const VehicleParams& params) {
  const auto in_range = [](double x) { return x > -1.0 && x < 1.0; };
  if (!in_range(raw.speed) || !in_range(raw.steering)) {
    throw std::domain_error("raw action components must lie in (-1, 1)");
  }
  return {(raw.speed + 1.0) / 2.0 * params.max_speed, raw.steering * params.max_steering};
}

RawAction normalize_action(const ActionCmd& cmd, const VehicleParams& params) {
  static const double kLimit = std::nextafter(1.0, 0.0);
  return {std::clamp(2.0 * cmd.speed / params.max_speed - 1.0, -kLimit, kLimit),
          std::clamp(cmd.steering / params.max_steering, -kLimit, kLimit)};
}

}  // namespace tickbench
