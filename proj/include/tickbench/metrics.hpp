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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tickbench/map.hpp"
#include "tickbench/types.hpp"

namespace tickbench {

struct RunRecord;

/// Frames an overlap must persist to start a collision event, and clear
/// frames needed to end one.
inline constexpr int kCollisionStartSteps = 3;
inline constexpr int kCollisionEndSteps = 5;

struct CollisionEvent {
  std::pair<size_t, size_t> agents;  // first < second
  int start_step = 0;
  int end_step = 0;

  bool operator==(const CollisionEvent&) const = default;
};

/// Online debouncer for one agent pair. Feed one overlap sample per step.
class CollisionHysteresis {
 public:
  enum class Transition { kNone, kStarted, kEnded };

  Transition update(int step, bool overlap);
  bool active() const { return active_; }
  int start_step() const { return start_; }
  int last_overlap_step() const { return last_true_; }

 private:
  bool active_ = false;
  int true_run_ = 0;
  int false_run_ = 0;
  int start_ = -1;
  int last_true_ = -1;
};

/// Events in one overlap series as (start_step, end_step) pairs.
std::vector<std::pair<int, int>> detect_events_in_series(std::span<const bool> overlap);

std::vector<CollisionEvent> detect_collision_events(const RunRecord& record,
                                                    const VehicleParams& params);

struct MetricOptions {
  double slack_fraction = 0.1;  // of vehicle width
  bool exclude_reset_steps = true;
};

struct RunMetrics {
  double cra_a = 0.0;           // events / 100 m
  double cra_l = 0.0;           // m / 100 m
  double cd = 0.0;              // m
  double as = 0.0;              // m/s
  double total_distance = 0.0;  // m
  std::vector<CollisionEvent> events;

  bool operator==(const RunMetrics&) const = default;
};

/// Sum over agents of travelled distance, minus collision-reset jumps when
/// excluded.
double total_distance(const RunRecord& record, const MetricOptions& options = {});

/// Throws std::domain_error when nothing was travelled.
double cra_a(const RunRecord& record, const VehicleParams& params,
             const MetricOptions& options = {});
double cra_l(const RunRecord& record, const MapModel& map, const VehicleParams& params,
             const MetricOptions& options = {});
double centerline_deviation(const RunRecord& record, const MapModel& map,
                            const MetricOptions& options = {});
double average_speed(const RunRecord& record, const MetricOptions& options = {});

RunMetrics compute_metrics(const RunRecord& record, const MapModel& map,
                           const MetricOptions& options = {});

nlohmann::json to_json(const RunMetrics& m);
RunMetrics metrics_from_json(const nlohmann::json& doc);

}  // namespace tickbench
