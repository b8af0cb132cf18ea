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

#include "tickbench/executor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "tickbench/dynamics.hpp"
#include "tickbench/errors.hpp"
#include "tickbench/geometry.hpp"
#include "tickbench/metrics.hpp"
#include "tickbench/policy.hpp"
#include "tickbench/random.hpp"

namespace tickbench {

namespace {

constexpr double kRespawnShift = 0.1;  // m per backward retry
constexpr int kMaxRespawnShifts = 500;

SigmaState pose_state(const Vec2& position, double yaw, double speed) {
  SigmaState s;
  s.position = position;
  s.yaw = wrap_angle(yaw);
  s.velocity = {speed * std::cos(s.yaw), speed * std::sin(s.yaw)};
  return s;
}

}  // namespace

uint64_t policy_seed_for(const RunConfig& cfg) { return derive_seed(cfg.seed, "policy"); }

std::vector<InitialAgent> resolve_placements(const RunConfig& cfg, const MapModel& map) {
  if (map.reference_paths().empty()) {
    throw EpisodeError("map defines no reference paths");
  }
  const ReferencePath& first = map.reference_paths().front();
  std::vector<InitialAgent> out;
  if (cfg.placements.empty()) {
    const double length = path_length(first.points);
    const double spacing = length / cfg.n_agent;
    for (int k = 0; k < cfg.n_agent; ++k) {
      const PathPose pose = point_at_arc_length(first.points, k * spacing, first.closed);
      out.push_back({pose_state(pose.position, pose.heading, 0.0), first.name});
    }
    return out;
  }
  for (const Placement& p : cfg.placements) {
    const ReferencePath* path = &first;
    if (!p.path.empty()) {
      try {
        path = &map.reference_path(p.path);
      } catch (const std::out_of_range& e) {
        throw ConfigError(e.what());
      }
    }
    if (p.arc_length) {
      const PathPose pose = point_at_arc_length(path->points, *p.arc_length, path->closed);
      const Vec2 left{-std::sin(pose.heading), std::cos(pose.heading)};
      out.push_back({pose_state(pose.position + left * p.lateral, pose.heading, p.speed), path->name});
    } else {
      out.push_back({pose_state(p.position, p.yaw, p.speed), path->name});
    }
  }
  return out;
}

SigmaState reference_at(const Trajectory& traj, double now) {
  const size_t n = traj.states.size();
  if (n == 1) {
    return traj.states.front();
  }
  const double f = (now - traj.t0) / traj.dt;
  const size_t i = static_cast<size_t>(std::clamp(std::floor(f), 0.0, static_cast<double>(n - 2)));
  const double w = std::clamp(f - static_cast<double>(i), 0.0, 1.0);
  if (w == 0.0) {
    return traj.states[i];
  }
  const SigmaState& a = traj.states[i];
  const SigmaState& b = traj.states[i + 1];
  SigmaState out;
  out.position = a.position + (b.position - a.position) * w;
  out.yaw = wrap_angle(a.yaw + wrap_angle(b.yaw - a.yaw) * w);
  out.velocity = a.velocity + (b.velocity - a.velocity) * w;
  out.steering = a.steering + (b.steering - a.steering) * w;
  return out;
}

ActionCmd follow_step(const SigmaState& measured, const Trajectory& traj, double now,
                      const VehicleParams& params, const FollowerGains& gains) {
  if (traj.states.size() < 2 || traj.actions.size() + 1 != traj.states.size()) {
    throw EpisodeError("follower received a malformed trajectory");
  }
  const double horizon = traj.dt * static_cast<double>(traj.actions.size());
  const double eps = 1e-9 * std::max(1.0, std::abs(traj.t0));
  if (now < traj.t0 - eps || now > traj.t0 + horizon + eps) {
    throw EpisodeError("trajectory expired");
  }
  const SigmaState ref = reference_at(traj, now);
  const size_t k = static_cast<size_t>(std::clamp(std::floor((now - traj.t0) / traj.dt), 0.0,
                                                  static_cast<double>(traj.actions.size() - 1)));
  const ActionCmd& feed_forward = traj.actions[k];

  const Vec2 ref_dir{std::cos(ref.yaw), std::sin(ref.yaw)};
  const double along_error = dot(ref.position - measured.position, ref_dir);
  const double speed_error = ref.speed() - measured.speed();
  const double speed = std::clamp(
      feed_forward.speed + gains.k_speed * speed_error + gains.k_along * along_error, 0.0,
      params.max_speed);

  // Steering correction is the difference between what pure pursuit asks
  // from the measured pose and from the reference pose, so it vanishes on
  // the trajectory.
  const Vec2 target = reference_at(traj, std::min(now + gains.lookahead_time, traj.t0 + horizon))
                          .position;
  const double correction = pursuit_steering(measured.position, measured.yaw, target, params) -
                            pursuit_steering(ref.position, ref.yaw, target, params);
  const double steering =
      std::clamp(feed_forward.steering + correction, -params.max_steering, params.max_steering);
  return {speed, steering};
}

namespace {

struct Observer {
  RunConfig cfg;
  std::vector<RandomStream> position_noise;
  std::vector<RandomStream> yaw_noise;

  Observer(const RunConfig& c, size_t n) : cfg(c) {
    const uint64_t base = derive_seed(c.seed, c.disturbance.noise_seed);
    for (size_t a = 0; a < n; ++a) {
      position_noise.emplace_back(derive_seed(derive_seed(base, "obs-position"), a));
      yaw_noise.emplace_back(derive_seed(derive_seed(base, "obs-yaw"), a));
    }
  }

  int latency() const {
    const auto& d = cfg.disturbance;
    return d.enable_localization_latency ? d.localization_latency : 0;
  }

  int source_step(int step) const { return std::max(0, step - latency()); }

  std::vector<CpmState> observe(const std::vector<std::vector<CpmState>>& history, int step) {
    const int source = source_step(step);
    std::vector<CpmState> out = history[static_cast<size_t>(source)];
    const auto& d = cfg.disturbance;
    for (size_t a = 0; a < out.size(); ++a) {
      if (d.enable_position_noise && d.obs_position_noise_std > 0.0) {
        out[a].position.x += d.obs_position_noise_std * position_noise[a].normal();
        out[a].position.y += d.obs_position_noise_std * position_noise[a].normal();
      }
      if (d.enable_yaw_noise && d.obs_yaw_noise_std > 0.0) {
        out[a].yaw = wrap_angle(out[a].yaw + d.obs_yaw_noise_std * yaw_noise[a].normal());
      }
    }
    return out;
  }
};

bool overlaps_any(size_t agent, const std::vector<SigmaState>& truth, const VehicleParams& params) {
  const OrientedBox fp = footprint(truth[agent], params);
  for (size_t o = 0; o < truth.size(); ++o) {
    if (o != agent && signed_separation(fp, footprint(truth[o], params)) <= 0.0) {
      return true;
    }
  }
  return false;
}

bool placement_clear(size_t agent, const std::vector<SigmaState>& truth, const MapModel& map,
                     const VehicleParams& params) {
  return !overlaps_any(agent, truth, params) &&
         lane_violation_depth(footprint(truth[agent], params), map.drivable_area()) <= 0.0;
}

// Puts the agent back at its last non-overlapping pose at rest, backing off
// along its reference path until the spot is free.
void respawn(size_t agent, const SigmaState& last_clear, const ReferencePath& path,
             std::vector<SigmaState>& truth, const MapModel& map, const VehicleParams& params) {
  truth[agent] = pose_state(last_clear.position, last_clear.yaw, 0.0);
  if (placement_clear(agent, truth, map, params)) {
    return;
  }
  const PolylineProjection proj =
      project_onto_polyline_heading(last_clear.position, last_clear.yaw, path.points);
  for (int k = 1; k <= kMaxRespawnShifts; ++k) {
    const double s = proj.arc_length - kRespawnShift * k;
    if (!path.closed && s < 0.0) {
      break;
    }
    const PathPose pose = point_at_arc_length(path.points, s, path.closed);
    truth[agent] = pose_state(pose.position, pose.heading, 0.0);
    if (placement_clear(agent, truth, map, params)) {
      return;
    }
  }
  throw EpisodeError("no free respawn pose for agent " + std::to_string(agent));
}

}  // namespace

RunRecord run_episode(const RunConfig& cfg, const MapModel& map, PlannerBinding& planner) {
  const auto wall_start = std::chrono::steady_clock::now();
  cfg.validate();
  const VehicleParams& params = cfg.vehicle;
  const std::vector<InitialAgent> initial = resolve_placements(cfg, map);
  const size_t n = initial.size();

  RunRecord record;
  record.config = cfg;
  std::vector<const ReferencePath*> paths;
  std::vector<SigmaState> truth;
  for (const InitialAgent& a : initial) {
    record.reference_paths.push_back(a.reference_path);
    paths.push_back(&map.reference_path(a.reference_path));
    truth.push_back(a.state);
  }

  EpisodeInfo info;
  info.dt = cfg.dt;
  info.H_c = cfg.H_c;
  info.H_p = cfg.H_p;
  info.map = &map;
  info.reference_paths = record.reference_paths;
  info.policy_seed = policy_seed_for(cfg);
  info.vehicle = params;
  info.peer_prediction = cfg.peer_prediction;
  info.substeps = cfg.substeps;
  planner.begin(info);

  Observer observer(cfg, n);
  const int delay = cfg.disturbance.enable_actuation_delay ? cfg.disturbance.actuation_delay : 0;
  std::vector<std::deque<ActionCmd>> queues(n);
  for (size_t a = 0; a < n; ++a) {
    queues[a].assign(static_cast<size_t>(delay), ActionCmd{truth[a].speed(), truth[a].steering});
  }

  std::vector<CollisionHysteresis> pairs(n * n);
  std::vector<SigmaState> last_clear = truth;
  // Respawns are applied on the tick after the collision is confirmed, so
  // the confirming overlap stays in the log and offline detection agrees.
  std::vector<bool> pending_respawn(n, false);

  const auto log_states = [&] {
    std::vector<CpmState> row;
    row.reserve(n);
    for (const SigmaState& s : truth) {
      row.push_back(map_sigma_to_cpm(s, params));
    }
    record.states.push_back(std::move(row));
  };
  const auto update_collisions = [&](int logged_step) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        const bool overlap = signed_separation(footprint(truth[i], params),
                                               footprint(truth[j], params)) <= 0.0;
        if (pairs[i * n + j].update(logged_step, overlap) ==
                CollisionHysteresis::Transition::kStarted &&
            cfg.reset_on_collision) {
          pending_respawn[i] = pending_respawn[j] = true;
        }
      }
    }
    for (size_t a = 0; a < n; ++a) {
      if (!overlaps_any(a, truth, params)) {
        last_clear[a] = truth[a];
      }
    }
  };
  log_states();
  update_collisions(0);

  for (int step = 0; step < cfg.steps; ++step) {
    const double now = step * cfg.dt;
    const std::vector<CpmState> observed = observer.observe(record.states, step);
    const std::vector<Trajectory> plans = planner.plan(step, now, observed);
    if (plans.size() != n) {
      throw EpisodeError("planner returned " + std::to_string(plans.size()) +
                         " trajectories for " + std::to_string(n) + " agents");
    }
    std::vector<ActionCmd> applied(n);
    for (size_t a = 0; a < n; ++a) {
      const Trajectory& traj = plans[a];
      if (traj.states.size() != static_cast<size_t>(cfg.H_p) + 1 ||
          traj.actions.size() != static_cast<size_t>(cfg.H_p)) {
        throw EpisodeError("invalid trajectory length for agent " + std::to_string(a));
      }
      if (pending_respawn[a]) {
        continue;
      }
      ActionCmd cmd;
      if (cfg.mode == ExecutionMode::kDirect) {
        cmd = traj.actions.front();
      } else {
        SigmaState measured = map_cpm_to_sigma(observed[a], params);
        double track_time = now;
        if (cfg.follower.delay_compensation) {
          // The plan starts from the observed (possibly aged) state; roll that
          // state through the commands issued since and those still queued,
          // and track the plan at the moment this command takes effect.
          const int source = observer.source_step(step);
          for (int k = source; k < step; ++k) {
            measured = step_bicycle(measured, record.actions[static_cast<size_t>(k)][a], cfg.dt,
                                    params, cfg.substeps);
          }
          for (const ActionCmd& queued : queues[a]) {
            measured = step_bicycle(measured, queued, cfg.dt, params, cfg.substeps);
          }
          track_time += cfg.dt * static_cast<double>(step - source + delay);
        }
        cmd = follow_step(measured, traj, track_time, params, cfg.follower);
      }
      queues[a].push_back(cmd);
      applied[a] = queues[a].front();
      queues[a].pop_front();
      truth[a] = step_bicycle(truth[a], applied[a], cfg.dt, params, cfg.substeps);
    }
    for (size_t a = 0; a < n; ++a) {
      if (!pending_respawn[a]) {
        continue;
      }
      respawn(a, last_clear[a], *paths[a], truth, map, params);
      queues[a].assign(static_cast<size_t>(delay), ActionCmd{0.0, 0.0});
      applied[a] = ActionCmd{0.0, 0.0};
      record.resets.push_back({step + 1, a});
      pending_respawn[a] = false;
    }
    record.actions.push_back(applied);
    update_collisions(step + 1);
    log_states();
  }
  planner.end();

  record.late_responses = planner.late_responses();
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return record;
}

void write_run_log(const RunRecord& record, std::ostream& out) {
  for (size_t t = 0; t < record.states.size(); ++t) {
    nlohmann::json agents = nlohmann::json::array();
    for (size_t a = 0; a < record.states[t].size(); ++a) {
      const CpmState& s = record.states[t][a];
      nlohmann::json ja = {{"id", a},
                           {"x", s.position.x},
                           {"y", s.position.y},
                           {"yaw", s.yaw},
                           {"speed", s.speed},
                           {"steer_norm", s.steering_normalized}};
      if (t < record.actions.size()) {
        ja["u_v"] = record.actions[t][a].speed;
        ja["u_sigma"] = record.actions[t][a].steering;
      } else {
        ja["u_v"] = nullptr;
        ja["u_sigma"] = nullptr;
      }
      agents.push_back(std::move(ja));
    }
    out << nlohmann::json{{"step", t}, {"agents", std::move(agents)}}.dump() << '\n';
  }
}

nlohmann::json run_meta(const RunRecord& record) {
  nlohmann::json resets = nlohmann::json::array();
  for (const ResetEvent& r : record.resets) {
    resets.push_back({{"step", r.step}, {"agent", r.agent}});
  }
  return {{"config", to_json(record.config)},
          {"reference_paths", record.reference_paths},
          {"resets", std::move(resets)}};
}

RunRecord read_run(std::istream& log, const nlohmann::json& meta) {
  RunRecord record;
  try {
    record.config = parse_config(meta.at("config"));
    record.reference_paths = meta.at("reference_paths").get<std::vector<std::string>>();
    for (const auto& r : meta.at("resets")) {
      record.resets.push_back({r.at("step").get<int>(), r.at("agent").get<size_t>()});
    }
    std::string line;
    while (std::getline(log, line)) {
      if (line.empty()) {
        continue;
      }
      const auto doc = nlohmann::json::parse(line);
      if (doc.at("step").get<size_t>() != record.states.size()) {
        throw ParseError("run log: steps out of order");
      }
      std::vector<CpmState> row;
      std::vector<ActionCmd> actions;
      bool has_action = true;
      for (const auto& ja : doc.at("agents")) {
        row.push_back({{ja.at("x").get<double>(), ja.at("y").get<double>()},
                       ja.at("yaw").get<double>(),
                       ja.at("speed").get<double>(),
                       ja.at("steer_norm").get<double>()});
        if (ja.at("u_v").is_null()) {
          has_action = false;
        } else {
          actions.push_back({ja.at("u_v").get<double>(), ja.at("u_sigma").get<double>()});
        }
      }
      record.states.push_back(std::move(row));
      if (has_action) {
        record.actions.push_back(std::move(actions));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run log: ") + e.what());
  }
  return record;
}

void save_run(const RunRecord& record, const std::filesystem::path& stem) {
  std::ofstream log(stem.string() + ".jsonl");
  write_run_log(record, log);
  std::ofstream meta(stem.string() + ".meta.json");
  meta << run_meta(record).dump(1) << '\n';
  if (!log || !meta) {
    throw std::runtime_error("failed to write run files at " + stem.string());
  }
}

RunRecord load_run(const std::filesystem::path& stem) {
  std::ifstream log(stem.string() + ".jsonl");
  std::ifstream meta_in(stem.string() + ".meta.json");
  if (!log || !meta_in) {
    throw ParseError("cannot open run files at " + stem.string());
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run meta: ") + e.what());
  }
  return read_run(log, meta);
}

}  // namespace tickbench
