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

#include <memory>
#include <span>
#include <string>

#include "tickbench/map.hpp"
#include "tickbench/random.hpp"
#include "tickbench/types.hpp"

namespace tickbench {

struct PolicyInput {
  size_t ego_index = 0;
  std::span<const SigmaState> states;
  const MapModel* map = nullptr;
  const ReferencePath* reference_path = nullptr;
  RandomStream* rng = nullptr;
  double time = 0.0;  // predicted time of the query
};

/// Decision rule producing a squashed action. Implementations keep no
/// per-call state; randomness comes only from the input's stream.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual RawAction act(const PolicyInput& input) const = 0;
  virtual std::string name() const = 0;
};

/// Fixed speed fraction of max_speed, fixed steering fraction.
class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(double speed_fraction, double steering_fraction = 0.0);
  RawAction act(const PolicyInput& input) const override;
  std::string name() const override { return "constant"; }

 private:
  RawAction raw_;
};

/// Uniform in (-0.99, 0.99) per component.
class RandomPolicy final : public Policy {
 public:
  RawAction act(const PolicyInput& input) const override;
  std::string name() const override { return "random"; }
};

struct PursuitResult {
  ActionCmd cmd;
  bool path_exhausted = false;
};

/// Pure-pursuit steering toward the point `lookahead` metres further along
/// the path. On an open path the agent is exhausted once its projection
/// reaches the end; the command is then a stop.
PursuitResult pure_pursuit_act(const SigmaState& state, const ReferencePath& path, double lookahead,
                               double target_speed, const VehicleParams& params);

/// Pure-pursuit steering law toward a given target point.
double pursuit_steering(const Vec2& position, double yaw, const Vec2& target,
                        const VehicleParams& params);

class PurePursuitPolicy final : public Policy {
 public:
  PurePursuitPolicy(VehicleParams params, double lookahead = 0.3, double target_speed = 0.75);
  RawAction act(const PolicyInput& input) const override;
  std::string name() const override { return "pursuit"; }

 private:
  VehicleParams params_;
  double lookahead_;
  double target_speed_;
};

/// Builds a built-in policy by name: "constant", "pursuit", "random".
std::unique_ptr<Policy> make_policy(const std::string& name, const VehicleParams& params);

}  // namespace tickbench
