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

#include <gtest/gtest.h>

#include <numbers>

#include <json.hpp>

#include "support.hpp"
#include "tickbench/config.hpp"
#include "tickbench/errors.hpp"

using namespace tickbench;
using nlohmann::json;

TEST(Config, DefaultsMatchProtocol) {
  const RunConfig cfg = parse_config(json::object());
  EXPECT_EQ(cfg.dt, 0.1);
  EXPECT_EQ(cfg.steps, 180);
  EXPECT_EQ(cfg.n_agent, 3);
  EXPECT_EQ(cfg.H_c, 5);
  EXPECT_EQ(cfg.H_p, 8);
  EXPECT_EQ(cfg.mode, ExecutionMode::kDirect);
  EXPECT_TRUE(cfg.reset_on_collision);
  EXPECT_EQ(cfg.vehicle, VehicleParams{});
}

TEST(Config, VehicleDefaults) {
  const VehicleParams v;
  EXPECT_EQ(v.length, 0.22);
  EXPECT_EQ(v.width, 0.107);
  EXPECT_EQ(v.wheelbase, 0.15);
  EXPECT_EQ(v.rear_wheelbase, 0.075);
  EXPECT_NEAR(v.max_steering * 180.0 / std::numbers::pi, 31.0, 1e-12);
}

TEST(Config, Presets) {
  EXPECT_EQ(disturbance_preset("sim"), DisturbanceProfile{});
  const DisturbanceProfile twin = disturbance_preset("twin");
  EXPECT_EQ(twin.actuation_delay, 1);
  EXPECT_EQ(twin.obs_position_noise_std, 0.002);
  const DisturbanceProfile lab = disturbance_preset("lab");
  EXPECT_EQ(lab.actuation_delay, 2);
  EXPECT_EQ(lab.localization_latency, 1);
  EXPECT_EQ(lab.obs_position_noise_std, 0.005);
  EXPECT_NEAR(lab.obs_yaw_noise_std, 0.5 * std::numbers::pi / 180.0, 1e-15);
  EXPECT_THROW(disturbance_preset("mars"), ConfigError);
}

TEST(Config, PresetFixturesMatchBuiltins) {
  for (const char* name : {"sim", "twin", "lab"}) {
    const RunConfig cfg = load_config(test_support::data_path(std::string("presets/") + name + ".json"));
    EXPECT_EQ(cfg.disturbance, disturbance_preset(name)) << name;
  }
}

TEST(Config, PresetWithOverrides) {
  const RunConfig cfg =
      parse_config(json{{"disturbance", {{"preset", "lab"}, {"actuation_delay", 0}}}});
  EXPECT_EQ(cfg.disturbance.actuation_delay, 0);
  EXPECT_EQ(cfg.disturbance.localization_latency, 1);
}

TEST(Config, DegreeKeys) {
  const RunConfig cfg = parse_config(json{{"vehicle", {{"max_steering_deg", 25.0}}}});
  EXPECT_NEAR(cfg.vehicle.max_steering, 25.0 * std::numbers::pi / 180.0, 1e-15);
  EXPECT_THROW(parse_config(json{{"vehicle", {{"max_steering_deg", 25.0}, {"max_steering", 0.4}}}}),
               ParseError);
}

TEST(Config, AgentCountInferredFromPlacements) {
  const RunConfig cfg = parse_config(json{{"placements", {{{"s", 0.0}}, {{"s", 3.0}}}}});
  EXPECT_EQ(cfg.n_agent, 2);
  EXPECT_THROW(parse_config(json{{"n_agent", 3}, {"placements", {{{"s", 0.0}}}}}), ConfigError);
}

TEST(Config, PlacementForms) {
  EXPECT_THROW(parse_config(json{{"placements", {{{"s", 0.0}, {"x", 1.0}}}}}), ParseError);
  EXPECT_THROW(parse_config(json{{"placements", {{{"x", 1.0}}}}}), ParseError);
  EXPECT_THROW(parse_config(json{{"placements", {{{"s", 0.0}, {"yaw", 1.0}}}}}), ParseError);
  const RunConfig cfg = parse_config(json{{"placements", {{{"x", 1.0}, {"y", 2.0}, {"yaw_deg", 90.0}}}}});
  EXPECT_NEAR(cfg.placements[0].yaw, std::numbers::pi / 2, 1e-15);
}

TEST(Config, Validation) {
  EXPECT_THROW(parse_config(json{{"H_c", 9}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"dt", 0.0}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"steps", -1}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"disturbance", {{"actuation_delay", -1}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"vehicle", {{"rear_wheelbase", 0.2}}}}), ConfigError);
  // Delay compensation needs the plan to cover the observation age.
  EXPECT_THROW(parse_config(json{{"mode", "follow"}, {"disturbance", {{"actuation_delay", 8}}}}),
               ConfigError);
}

TEST(Config, TypeErrors) {
  EXPECT_THROW(parse_config(json{{"dt", "fast"}}), ParseError);
  EXPECT_THROW(parse_config(json{{"bogus", 1}}), ParseError);
  EXPECT_THROW(parse_config(json{{"mode", "teleport"}}), ParseError);
  EXPECT_THROW(parse_config(std::string_view("{not json")), ParseError);
}

TEST(Config, JsonRoundTrip) {
  RunConfig cfg = load_config(test_support::data_path("configs/example.json"));
  cfg.follower.k_speed = 0.7;
  cfg.vehicle.max_speed = 0.9;
  EXPECT_EQ(parse_config(to_json(cfg)), cfg);
  EXPECT_EQ(parse_config(to_json(RunConfig{})), RunConfig{});
}
