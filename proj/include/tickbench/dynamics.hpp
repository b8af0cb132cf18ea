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

#include "tickbench/types.hpp"

namespace tickbench {

/// Slip angle of the kinematic bicycle: atan(l_r / l_wb * tan(steering)).
double slip_angle(double steering, const VehicleParams& params);

/// State-list format to planner format. Steering is denormalized by the
/// steering limit and the speed is rotated into the global frame along the
/// heading plus slip angle.
SigmaState map_cpm_to_sigma(const CpmState& s, const VehicleParams& params);
CpmState map_sigma_to_cpm(const SigmaState& s, const VehicleParams& params);

/// Applies steering-rate, steering, acceleration and speed limits to a
/// command given the current state. The result is what the vehicle realizes.
ActionCmd limit_command(const SigmaState& s, const ActionCmd& cmd, double dt,
                        const VehicleParams& params);

/// One explicit-Euler step of the kinematic bicycle after limiting the
/// command. `substeps` > 1 splits the position/yaw integration.
SigmaState step_bicycle(const SigmaState& s, const ActionCmd& cmd, double dt,
                        const VehicleParams& params, int substeps = 1);

/// Maps a squashed action in (-1, 1)^2 onto the control range. Throws
/// std::domain_error when a component lies outside the open interval.
ActionCmd rescale_action(const RawAction& raw, const VehicleParams& params);

/// Inverse of rescale_action, clamped strictly inside (-1, 1).
RawAction normalize_action(const ActionCmd& cmd, const VehicleParams& params);

}  // namespace tickbench
