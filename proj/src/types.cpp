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

#include "tickbench/types.hpp"

#include <numbers>

#include "tickbench/errors.hpp"

namespace tickbench {

void VehicleParams::validate() const {
  if (!(length > 0.0)) {
    throw ConfigError("vehicle length must be positive");
  }
  if (!(width > 0.0)) {
    throw ConfigError("vehicle width must be positive");
  }
  if (!(rear_wheelbase > 0.0 && rear_wheelbase < wheelbase && wheelbase <= length)) {
    throw ConfigError("vehicle geometry requires 0 < rear_wheelbase < wheelbase <= length");
  }
  if (!(max_steering > 0.0 && max_steering < std::numbers::pi / 2.0)) {
    throw ConfigError("max_steering must lie in (0, pi/2)");
  }
  if (!(max_steering_rate > 0.0)) {
    throw ConfigError("max_steering_rate must be positive");
  }
  if (!(min_accel < 0.0 && max_accel > 0.0)) {
    throw ConfigError("acceleration limits require min_accel < 0 < max_accel");
  }
  if (!(max_speed > 0.0)) {
    throw ConfigError("max_speed must be positive");
  }
}

}  // namespace tickbench
