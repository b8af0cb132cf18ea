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

#include "tickbench/metrics.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <stdexcept>

#include "tickbench/executor.hpp"
#include "tickbench/geometry.hpp"

namespace tickbench {

CollisionHysteresis::Transition CollisionHysteresis::update(int step, bool overlap) {
  if (overlap) {
    ++true_run_;
    false_run_ = 0;
    last_true_ = step;
    if (!active_ && true_run_ >= kCollisionStartSteps) {
      active_ = true;
      start_ = step - (kCollisionStartSteps - 1);
      return Transition::kStarted;
    }
    return Transition::kNone;
  }
  ++false_run_;
  true_run_ = 0;
  if (active_ && false_run_ >= kCollisionEndSteps) {
    active_ = false;
    return Transition::kEnded;
  }
  return Transition::kNone;
}

std::vector<std::pair<int, int>> detect_events_in_series(std::span<const bool> overlap) {
  std::vector<std::pair<int, int>> events;
  CollisionHysteresis filter;
  for (size_t t = 0; t < overlap.size(); ++t) {
    const int start = filter.start_step();
    const auto tr = filter.update(static_cast<int>(t), overlap[t]);
    if (tr == CollisionHysteresis::Transition::kEnded) {
      events.emplace_back(start, filter.last_overlap_step());
    }
  }
  if (filter.active()) {
    events.emplace_back(filter.start_step(), filter.last_overlap_step());
  }
  return events;
}

namespace {

OrientedBox footprint_of(const CpmState& s, const VehicleParams& params) {
  return {s.position, s.yaw, 0.5 * params.length, 0.5 * params.width};
}

using ResetSet = std::set<std::pair<size_t, int>>;  // (agent, step)

ResetSet reset_steps(const RunRecord& record, const MetricOptions& options) {
  ResetSet out;
  if (options.exclude_reset_steps) {
    for (const ResetEvent& r : record.resets) {
      out.emplace(r.agent, r.step);
    }
  }
  return out;
}

double require_distance(const RunRecord& record, const MetricOptions& options) {
  const double total = total_distance(record, options);
  if (!(total > 0.0)) {
    throw std::domain_error("metric undefined: no distance travelled");
  }
  return total;
}

}  // namespace

std::vector<CollisionEvent> detect_collision_events(const RunRecord& record,
                                                    const VehicleParams& params) {
  std::vector<CollisionEvent> events;
  const size_t n = record.n_agent();
  const size_t steps = record.states.size();
  // std::vector<bool> is not contiguous, so the series lives in a plain array.
  const auto series = std::make_unique<bool[]>(steps);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      for (size_t t = 0; t < steps; ++t) {
        series[t] = signed_separation(footprint_of(record.states[t][i], params),
                                      footprint_of(record.states[t][j], params)) <= 0.0;
      }
      for (const auto& [start, end] :
           detect_events_in_series(std::span<const bool>(series.get(), steps))) {
        events.push_back({{i, j}, start, end});
      }
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return a.start_step < b.start_step;
  });
  return events;
}

double total_distance(const RunRecord& record, const MetricOptions& options) {
  const ResetSet resets = reset_steps(record, options);
  double total = 0.0;
  for (size_t a = 0; a < record.n_agent(); ++a) {
    for (size_t t = 1; t < record.states.size(); ++t) {
      if (resets.contains({a, static_cast<int>(t)})) {
        continue;
      }
      total += distance(record.states[t - 1][a].position, record.states[t][a].position);
    }
  }
  return total;
}

double cra_a(const RunRecord& record, const VehicleParams& params, const MetricOptions& options) {
  const double total = require_distance(record, options);
  return 100.0 * static_cast<double>(detect_collision_events(record, params).size()) / total;
}

double cra_l(const RunRecord& record, const MapModel& map, const VehicleParams& params,
             const MetricOptions& options) {
  const double total = require_distance(record, options);
  const ResetSet resets = reset_steps(record, options);
  const double slack = options.slack_fraction * params.width;
  double violating = 0.0;
  for (size_t a = 0; a < record.n_agent(); ++a) {
    for (size_t t = 1; t < record.states.size(); ++t) {
      if (resets.contains({a, static_cast<int>(t)})) {
        continue;
      }
      const CpmState& s = record.states[t][a];
      if (lane_violation_depth(footprint_of(s, params), map.drivable_area()) > slack) {
        violating += distance(record.states[t - 1][a].position, s.position);
      }
    }
  }
  return 100.0 * violating / total;
}

double centerline_deviation(const RunRecord& record, const MapModel& map,
                            const MetricOptions& options) {
  const ResetSet resets = reset_steps(record, options);
  double sum = 0.0;
  size_t count = 0;
  for (size_t a = 0; a < record.n_agent(); ++a) {
    const ReferencePath& path = map.reference_path(record.reference_paths.at(a));
    for (size_t t = 0; t < record.states.size(); ++t) {
      if (resets.contains({a, static_cast<int>(t)})) {
        continue;
      }
      sum += project_onto_polyline(record.states[t][a].position, path.points).lateral_offset;
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

double average_speed(const RunRecord& record, const MetricOptions& options) {
  const ResetSet resets = reset_steps(record, options);
  double sum = 0.0;
  size_t count = 0;
  for (size_t a = 0; a < record.n_agent(); ++a) {
    for (size_t t = 0; t < record.states.size(); ++t) {
      if (resets.contains({a, static_cast<int>(t)})) {
        continue;
      }
      sum += record.states[t][a].speed;
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

RunMetrics compute_metrics(const RunRecord& record, const MapModel& map,
                           const MetricOptions& options) {
  const VehicleParams& params = record.config.vehicle;
  RunMetrics m;
  m.total_distance = require_distance(record, options);
  m.events = detect_collision_events(record, params);
  m.cra_a = 100.0 * static_cast<double>(m.events.size()) / m.total_distance;
  m.cra_l = cra_l(record, map, params, options);
  m.cd = centerline_deviation(record, map, options);
  m.as = average_speed(record, options);
  return m;
}

nlohmann::json to_json(const RunMetrics& m) {
  nlohmann::json events = nlohmann::json::array();
  for (const CollisionEvent& e : m.events) {
    events.push_back({{"agents", {e.agents.first, e.agents.second}},
                      {"start_step", e.start_step},
                      {"end_step", e.end_step}});
  }
  return {{"cra_a", m.cra_a},
          {"cra_l", m.cra_l},
          {"cd", m.cd},
          {"as", m.as},
          {"total_distance", m.total_distance},
          {"events", std::move(events)}};
}

RunMetrics metrics_from_json(const nlohmann::json& doc) {
  RunMetrics m;
  m.cra_a = doc.at("cra_a").get<double>();
  m.cra_l = doc.at("cra_l").get<double>();
  m.cd = doc.at("cd").get<double>();
  m.as = doc.at("as").get<double>();
  m.total_distance = doc.at("total_distance").get<double>();
  for (const auto& e : doc.at("events")) {
    m.events.push_back({{e.at("agents").at(0).get<size_t>(), e.at("agents").at(1).get<size_t>()},
                        e.at("start_step").get<int>(),
                        e.at("end_step").get<int>()});
  }
  return m;
}

}  // namespace tickbench
