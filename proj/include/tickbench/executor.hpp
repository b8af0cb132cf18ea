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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tickbench/config.hpp"
#include "tickbench/map.hpp"
#include "tickbench/planner.hpp"
#include "tickbench/types.hpp"
#include "tickbench/wire.hpp"

namespace tickbench {

struct ResetEvent {
  int step = 0;
  size_t agent = 0;

  bool operator==(const ResetEvent&) const = default;
};

/// Ground-truth log of one episode. states has steps + 1 rows, actions has
/// steps rows (the command applied over [k, k + 1)), each row one entry per
/// agent.
struct RunRecord {
  RunConfig config;
  std::vector<std::string> reference_paths;
  std::vector<std::vector<CpmState>> states;
  std::vector<std::vector<ActionCmd>> actions;
  std::vector<ResetEvent> resets;

  // Not part of equality or of the written log.
  double wall_seconds = 0.0;
  int late_responses = 0;

  size_t n_agent() const { return states.empty() ? 0 : states.front().size(); }

  bool operator==(const RunRecord& o) const {
    return config == o.config && reference_paths == o.reference_paths && states == o.states &&
           actions == o.actions && resets == o.resets;
  }
};

struct InitialAgent {
  SigmaState state;
  std::string reference_path;
};

/// Resolves placements against the map. With no placements, agents are
/// spread evenly along the map's first reference path.
std::vector<InitialAgent> resolve_placements(const RunConfig& cfg, const MapModel& map);

/// Tracking command for the mid-level follower: feed-forward from the
/// reference at `now`, a speed and along-track correction, and a pure-pursuit
/// steering correction toward the reference point `lookahead_time` ahead.
/// Throws EpisodeError when `now` lies outside the trajectory.
ActionCmd follow_step(const SigmaState& measured, const Trajectory& traj, double now,
                      const VehicleParams& params, const FollowerGains& gains);

/// Reference state at time `now`, linearly interpolated between samples.
SigmaState reference_at(const Trajectory& traj, double now);

/// Executes cfg.steps lockstep ticks. All randomness derives from cfg.seed
/// and the disturbance noise_seed. Throws EpisodeError, PolicyError or
/// ProtocolError.
RunRecord run_episode(const RunConfig& cfg, const MapModel& map, PlannerBinding& planner);

/// Seed of the policy's random streams for a run.
uint64_t policy_seed_for(const RunConfig& cfg);

/// JSON-lines, one record per step.
void write_run_log(const RunRecord& record, std::ostream& out);
/// Sidecar with the config snapshot, reference paths and reset events.
nlohmann::json run_meta(const RunRecord& record);

RunRecord read_run(std::istream& log, const nlohmann::json& meta);

void save_run(const RunRecord& record, const std::filesystem::path& stem);
RunRecord load_run(const std::filesystem::path& stem);

}  // namespace tickbench
