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

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "tickbench/dynamics.hpp"

using namespace tickbench;

namespace {

SigmaState at_rest(double yaw = 0.0) {
  SigmaState s;
  s.yaw = yaw;
  return s;
}

SigmaState moving(double speed, double steering, const VehicleParams& p) {
  CpmState c{{0, 0}, 0.0, speed, steering / p.max_steering};
  return map_cpm_to_sigma(c, p);
}

}  // namespace

TEST(SlipAngle, ZeroSteeringAndOddSymmetry) {
  const VehicleParams p;
  EXPECT_EQ(slip_angle(0.0, p), 0.0);
  EXPECT_DOUBLE_EQ(slip_angle(-0.3, p), -slip_angle(0.3, p));
}

TEST(SlipAngle, DefaultGeometryAtMaxSteering) {
  const VehicleParams p;
  // atan(0.5 * tan(31 deg)) evaluated independently.
  const double expected = std::atan2(0.075 * std::sin(31.0 * std::numbers::pi / 180.0),
                                     0.15 * std::cos(31.0 * std::numbers::pi / 180.0));
  EXPECT_NEAR(slip_angle(p.max_steering, p), expected, 1e-15);
  EXPECT_NEAR(expected, 0.291852, 1e-6);
}

TEST(StateMapping, RoundTrip) {
  const VehicleParams p;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const CpmState c{{5 * u(rng), 5 * u(rng)}, 3.1 * u(rng), std::abs(u(rng)), u(rng)};
    const CpmState back = map_sigma_to_cpm(map_cpm_to_sigma(c, p), p);
    EXPECT_NEAR(back.position.x, c.position.x, 1e-12);
    EXPECT_NEAR(back.yaw, c.yaw, 1e-12);
    EXPECT_NEAR(back.speed, c.speed, 1e-12);
    EXPECT_NEAR(back.steering_normalized, c.steering_normalized, 1e-12);
  }
}

TEST(StateMapping, VelocityAlongCourseAngle) {
  const VehicleParams p;
  const CpmState c{{0, 0}, 0.4, 0.8, 0.5};
  const SigmaState s = map_cpm_to_sigma(c, p);
  const double beta = slip_angle(0.5 * p.max_steering, p);
  EXPECT_NEAR(s.velocity.x, 0.8 * std::cos(0.4 + beta), 1e-15);
  EXPECT_NEAR(s.velocity.y, 0.8 * std::sin(0.4 + beta), 1e-15);
  EXPECT_NEAR(s.steering, 0.5 * p.max_steering, 1e-15);
}

TEST(Bicycle, StraightLineTravel) {
  const VehicleParams p;
  SigmaState s = moving(0.5, 0.0, p);
  for (int k = 0; k < 100; ++k) {
    s = step_bicycle(s, {0.5, 0.0}, 0.1, p);
  }
  EXPECT_NEAR(s.position.x, 5.0, 1e-12);
  EXPECT_EQ(s.yaw, 0.0);
}

TEST(Bicycle, AccelerationLimit) {
  const VehicleParams p;
  const SigmaState s = step_bicycle(at_rest(), {1.0, 0.0}, 0.1, p);
  EXPECT_NEAR(s.speed(), 0.5, 1e-15);  // 5 m/s^2 for 0.1 s
  EXPECT_NEAR(s.position.x, 0.05, 1e-15);
}

TEST(Bicycle, SteeringRateAndRangeLimits) {
  const VehicleParams p;
  SigmaState s = step_bicycle(at_rest(), {0.0, 1.0}, 0.1, p);
  EXPECT_NEAR(s.steering, p.max_steering_rate * 0.1, 1e-15);
  for (int k = 0; k < 20; ++k) {
    s = step_bicycle(s, {0.0, 1.0}, 0.1, p);
  }
  EXPECT_EQ(s.steering, p.max_steering);
}

TEST(Bicycle, SpeedClampedToRange) {
  const VehicleParams p;
  SigmaState s = moving(0.2, 0.0, p);
  s = step_bicycle(s, {-3.0, 0.0}, 0.1, p);
  EXPECT_EQ(s.speed(), 0.0);
  for (int k = 0; k < 10; ++k) {
    s = step_bicycle(s, {5.0, 0.0}, 0.1, p);
  }
  EXPECT_EQ(s.speed(), p.max_speed);
}

TEST(Bicycle, SubstepsConvergeTowardFineIntegration) {
  const VehicleParams p;
  const SigmaState s0 = moving(0.5, 0.3, p);
  const ActionCmd cmd{0.5, 0.3};
  const SigmaState coarse = step_bicycle(s0, cmd, 0.1, p, 1);
  const SigmaState fine = step_bicycle(s0, cmd, 0.1, p, 10);
  SigmaState manual = s0;
  for (int k = 0; k < 10; ++k) {
    manual = step_bicycle(manual, cmd, 0.01, p);
  }
  EXPECT_NEAR(fine.position.x, manual.position.x, 1e-12);
  EXPECT_NEAR(fine.yaw, manual.yaw, 1e-12);
  EXPECT_NE(coarse.position.y, fine.position.y);
}

TEST(ActionScaling, RescaleEndpoints) {
  const VehicleParams p;
  const double edge = std::nextafter(1.0, 0.0);
  EXPECT_NEAR(rescale_action({-edge, 0.0}, p).speed, 0.0, 1e-15);
  EXPECT_NEAR(rescale_action({edge, edge}, p).speed, p.max_speed, 1e-15);
  EXPECT_NEAR(rescale_action({0.0, -edge}, p).steering, -p.max_steering, 1e-15);
  EXPECT_EQ(rescale_action({0.0, 0.0}, p).speed, 0.5 * p.max_speed);
  EXPECT_THROW(rescale_action({1.0, 0.0}, p), std::domain_error);
  EXPECT_THROW(rescale_action({1.5, 0.0}, p), std::domain_error);
  EXPECT_THROW(rescale_action({0.0, std::nan("")}, p), std::domain_error);
}

TEST(ActionScaling, NormalizeInvertsRescale) {
  const VehicleParams p;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.999, 0.999);
  for (int i = 0; i < 1000; ++i) {
    const RawAction raw{u(rng), u(rng)};
    const RawAction back = normalize_action(rescale_action(raw, p), p);
    EXPECT_NEAR(back.speed, raw.speed, 1e-14);
    EXPECT_NEAR(back.steering, raw.steering, 1e-14);
  }
  EXPECT_LT(normalize_action({p.max_speed, 0.0}, p).speed, 1.0);
}
