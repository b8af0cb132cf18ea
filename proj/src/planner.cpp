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

#include "tickbench/planner.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tickbench/dynamics.hpp"
#include "tickbench/errors.hpp"

namespace tickbench {

double taper_steering(double u_last, int j, int H_c, int H_p) {
  if (H_c < 1 || H_c > H_p || j < H_c || j >= H_p) {
    throw std::out_of_range("taper step " + std::to_string(j) + " outside [H_c, H_p)");
  }
  if (j == H_p - 1) {
    return 0.0;
  }
  return u_last * static_cast<double>(H_p - 1 - j) / static_cast<double>(H_p - H_c);
}

namespace {

SigmaState predict_peer(const SigmaState& s, double dt, PeerPrediction mode) {
  if (mode == PeerPrediction::kFrozen) {
    return s;
  }
  SigmaState next = s;
  next.position = s.position + s.velocity * dt;
  return next;
}

}  // namespace

Trajectory generate_trajectory(const Policy& policy, size_t ego_index,
                               std::span<const SigmaState> all_states, const PlanContext& ctx,
                               RandomStream& rng) {
  const RunConfig& cfg = *ctx.cfg;
  const VehicleParams& params = cfg.vehicle;
  if (ego_index >= all_states.size()) {
    throw std::out_of_range("ego index outside the state list");
  }

  Trajectory traj;
  traj.t0 = ctx.t0;
  traj.dt = cfg.dt;
  traj.states.reserve(static_cast<size_t>(cfg.H_p) + 1);
  traj.actions.reserve(static_cast<size_t>(cfg.H_p));

  std::vector<SigmaState> scene(all_states.begin(), all_states.end());
  traj.states.push_back(scene[ego_index]);
  const ReferencePath* path =
      ego_index < ctx.reference_paths.size() ? ctx.reference_paths[ego_index] : nullptr;

  // Policy-based segment: the policy re-observes the predicted scene.
  for (int j = 0; j < cfg.H_c; ++j) {
    PolicyInput input;
    input.ego_index = ego_index;
    input.states = scene;
    input.map = ctx.map;
    input.reference_path = path;
    input.rng = &rng;
    input.time = ctx.t0 + j * cfg.dt;
    ActionCmd cmd;
    try {
      cmd = rescale_action(policy.act(input), params);
    } catch (const std::domain_error& e) {
      throw PolicyError(policy.name() + " policy: " + e.what());
    }
    traj.actions.push_back(cmd);
    const SigmaState next = step_bicycle(scene[ego_index], cmd, cfg.dt, params, cfg.substeps);
    for (size_t k = 0; k < scene.size(); ++k) {
      if (k != ego_index) {
        scene[k] = predict_peer(scene[k], cfg.dt, cfg.peer_prediction);
      }
    }
    scene[ego_index] = next;
    traj.states.push_back(next);
  }

  // Rules-based segment: hold the last commanded speed, taper steering.
  const ActionCmd last = traj.actions.back();
  for (int j = cfg.H_c; j < cfg.H_p; ++j) {
    const ActionCmd cmd{last.speed, taper_steering(last.steering, j, cfg.H_c, cfg.H_p)};
    traj.actions.push_back(cmd);
    traj.states.push_back(step_bicycle(traj.states.back(), cmd, cfg.dt, params, cfg.substeps));
  }
  return traj;
}

std::vector<SigmaState> resimulate(const Trajectory& traj, const VehicleParams& params,
                                   int substeps) {
  std::vector<SigmaState> out;
  if (traj.states.empty()) {
    return out;
  }
  out.push_back(traj.states.front());
  for (const ActionCmd& a : traj.actions) {
    out.push_back(step_bicycle(out.back(), a, traj.dt, params, substeps));
  }
  return out;
}

std::vector<TrajectoryPoint> to_points(const Trajectory& traj) {
  std::vector<TrajectoryPoint> points;
  points.reserve(traj.states.size());
  for (size_t j = 0; j < traj.states.size(); ++j) {
    const SigmaState& s = traj.states[j];
    TrajectoryPoint p{s.position, s.yaw, s.speed(), s.steering, std::nullopt};
    if (j < traj.actions.size()) {
      p.action = traj.actions[j];
    }
    points.push_back(p);
  }
  return points;
}

Trajectory from_points(double t0, double dt, std::span<const TrajectoryPoint> points,
                       const VehicleParams& params) {
  if (points.size() < 2) {
    throw ParseError("trajectory needs at least two points");
  }
  Trajectory traj;
  traj.t0 = t0;
  traj.dt = dt;
  for (size_t j = 0; j < points.size(); ++j) {
    const TrajectoryPoint& p = points[j];
    SigmaState s;
    s.position = p.position;
    s.yaw = wrap_angle(p.yaw);
    s.steering = p.steering;
    const double heading = s.yaw + slip_angle(p.steering, params);
    s.velocity = {p.speed * std::cos(heading), p.speed * std::sin(heading)};
    traj.states.push_back(s);
    if (j + 1 < points.size()) {
      traj.actions.push_back(p.action ? *p.action
                                      : ActionCmd{points[j + 1].speed, points[j + 1].steering});
    }
  }
  return traj;
}

Trajectory canonicalize(const Trajectory& traj, const VehicleParams& params) {
  const auto points = to_points(traj);
  return from_points(traj.t0, traj.dt, points, params);
}

nlohmann::json trajectory_to_json(const Trajectory& traj, const VehicleParams& /*params*/) {
  nlohmann::json pts = nlohmann::json::array();
  for (const TrajectoryPoint& p : to_points(traj)) {
    nlohmann::json jp = {{"x", p.position.x},
                         {"y", p.position.y},
                         {"yaw", p.yaw},
                         {"speed", p.speed},
                         {"steer", p.steering}};
    if (p.action) {
      jp["u_v"] = p.action->speed;
      jp["u_sigma"] = p.action->steering;
    }
    pts.push_back(std::move(jp));
  }
  return {{"t0", traj.t0}, {"dt", traj.dt}, {"points", std::move(pts)}};
}

Trajectory trajectory_from_json(const nlohmann::json& doc, const VehicleParams& params) {
  const auto number = [](const nlohmann::json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key) || !obj[key].is_number()) {
      throw ParseError(std::string("trajectory: missing numeric \"") + key + "\"");
    }
    return obj[key].get<double>();
  };
  if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array()) {
    throw ParseError("trajectory: expected {\"t0\", \"dt\", \"points\"}");
  }
  std::vector<TrajectoryPoint> points;
  for (const nlohmann::json& jp : doc["points"]) {
    TrajectoryPoint p;
    p.position = {number(jp, "x"), number(jp, "y")};
    p.yaw = number(jp, "yaw");
    p.speed = number(jp, "speed");
    p.steering = number(jp, "steer");
    const bool has_v = jp.contains("u_v");
    const bool has_s = jp.contains("u_sigma");
    if (has_v != has_s) {
      throw ParseError("trajectory: u_v and u_sigma must appear together");
    }
    if (has_v) {
      p.action = ActionCmd{number(jp, "u_v"), number(jp, "u_sigma")};
    }
    points.push_back(p);
  }
  return from_points(number(doc, "t0"), number(doc, "dt"), points, params);
}

}  // namespace tickbench
