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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "support.hpp"
#include "tickbench/bench.hpp"
#include "tickbench/dynamics.hpp"
#include "tickbench/geometry.hpp"
#include "tickbench/metrics.hpp"
#include "tickbench/planner.hpp"
#include "tickbench/policy.hpp"

using namespace tickbench;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void hysteresis() {
  const auto t0 = std::chrono::steady_clock::now();
  size_t mismatches = 0, cases = 0;
  std::vector<bool> bits;
  for (int n = 0; n <= 12; ++n) {
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
      auto series = std::make_unique<bool[]>(static_cast<size_t>(n) + 1);
      for (int i = 0; i < n; ++i) series[static_cast<size_t>(i)] = (mask >> i) & 1u;
      const std::span<const bool> s(series.get(), static_cast<size_t>(n));
      mismatches += detect_events_in_series(s) != oracle::events(s);
      ++cases;
    }
  }
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto series = std::make_unique<bool[]>(200);
  for (int k = 0; k < 10000; ++k) {
    // Sticky two-state chain so runs of every length occur.
    const double stay = 0.5 + 0.49 * u(rng);
    bool cur = u(rng) < 0.5;
    for (size_t i = 0; i < 200; ++i) {
      if (u(rng) > stay) cur = !cur;
      series[i] = cur;
    }
    const std::span<const bool> s(series.get(), 200);
    mismatches += detect_events_in_series(s) != oracle::events(s);
    ++cases;
  }
  const double secs = seconds_since(t0);
  report(mismatches == 0 && secs < 5.0, "hysteresis_oracle",
         fmt("%zu sequences, %zu mismatches, %.2f s (limit 5 s)", cases, mismatches, secs));
}

void geometry() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(500);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0, disagree = 0;
  while (checked < 500) {
    const oracle::Rect a{{0.3 * u(rng), 0.3 * u(rng)}, 4 * u(rng), 0.05 + 0.2 * std::abs(u(rng)),
                         0.03 + 0.1 * std::abs(u(rng))};
    const oracle::Rect b{{0.3 * u(rng), 0.3 * u(rng)}, 4 * u(rng), 0.05 + 0.2 * std::abs(u(rng)),
                         0.03 + 0.1 * std::abs(u(rng))};
    const double sep = signed_separation({a.c, a.yaw, a.hl, a.hw}, {b.c, b.yaw, b.hl, b.hw});
    if (std::abs(sep) <= 1e-3) continue;
    disagree += (sep < 0) != oracle::overlap_sampled(a, b, rng);
    ++checked;
  }
  const double secs = seconds_since(t0);
  report(disagree == 0 && secs < 30.0, "geometry_oracle",
         fmt("%d pairs, agreement %.1f %%, %.2f s (limit 30 s)", checked,
             100.0 * (checked - disagree) / checked, secs));
}

/// Algebraic least-squares circle fit; returns the radius.
double fit_radius(const std::vector<Vec2>& pts) {
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, sz = 0, sxz = 0, syz = 0;
  for (const Vec2& p : pts) {
    const double z = p.x * p.x + p.y * p.y;
    sx += p.x; sy += p.y; sxx += p.x * p.x; syy += p.y * p.y; sxy += p.x * p.y;
    sz += z; sxz += p.x * z; syz += p.y * z;
  }
  const double n = static_cast<double>(pts.size());
  // Solve [sxx sxy sx; sxy syy sy; sx sy n] [D E F]^T = -[sxz syz sz]^T.
  const std::array<std::array<double, 3>, 3> m{{{sxx, sxy, sx}, {sxy, syy, sy}, {sx, sy, n}}};
  const std::array<double, 3> r{-sxz, -syz, -sz};
  auto det = [](const std::array<std::array<double, 3>, 3>& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double d = det(m);
  std::array<double, 3> sol{};
  for (size_t c = 0; c < 3; ++c) {
    auto mc = m;
    for (size_t row = 0; row < 3; ++row) mc[row][c] = r[row];
    sol[c] = det(mc) / d;
  }
  return std::sqrt(sol[0] * sol[0] / 4 + sol[1] * sol[1] / 4 - sol[2]);
}

void dynamics() {
  const VehicleParams vp;
  const double dt = 0.01;
  const double expected = vp.wheelbase / std::tan(vp.max_steering);
  SigmaState s = map_cpm_to_sigma({{0.0, 0.0}, 0.0, 0.5, 1.0}, vp);
  std::vector<Vec2> rear;
  for (int i = 0; i < 1000; ++i) {
    s = step_bicycle(s, {0.5, vp.max_steering}, dt, vp);
    rear.push_back(s.position - Vec2{std::cos(s.yaw), std::sin(s.yaw)} * vp.rear_wheelbase);
  }
  const double radius = fit_radius(rear);
  const double rel = std::abs(radius - expected) / expected;

  const double yaw0 = 0.7;
  SigmaState t = map_cpm_to_sigma({{0.0, 0.0}, yaw0, 0.5, 0.0}, vp);
  for (int i = 0; i < 10000; ++i) t = step_bicycle(t, {0.5, 0.0}, dt, vp);
  const double drift = std::abs(t.yaw - yaw0);
  report(rel < 0.02 && drift < 1e-9, "dynamics",
         fmt("rear-axle radius %.5f m vs %.5f m (%.3f %%, limit 2 %%); straight heading drift %.1e rad "
             "(limit 1e-9)",
             radius, expected, 100 * rel, drift));
}

void planner_contract() {
  const MapModel& map = test_support::loop_map();
  const ReferencePath& loop = map.reference_path("loop");
  const RandomPolicy policy;
  std::mt19937_64 gen(1000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0, tapered = 0;
  for (int c = 0; c < 1000; ++c) {
    RunConfig cfg;
    cfg.H_p = 2 + static_cast<int>(gen() % 14);
    cfg.H_c = 1 + static_cast<int>(gen() % static_cast<uint64_t>(cfg.H_p));
    cfg.substeps = 1 + static_cast<int>(gen() % 3);
    std::vector<SigmaState> states;
    std::vector<const ReferencePath*> paths;
    for (int a = 0; a < 3; ++a) {
      const PathPose p = point_at_arc_length(loop.points, u(gen) * 15.0, true);
      states.push_back(map_cpm_to_sigma({p.position, p.heading, u(gen), 2 * u(gen) - 1}, cfg.vehicle));
      paths.push_back(&loop);
    }
    const PlanContext ctx{&map, paths, &cfg, 0.0};
    RandomStream rng(gen());
    const Trajectory t = generate_trajectory(policy, gen() % 3, states, ctx, rng);
    bool ok = t.actions.size() == static_cast<size_t>(cfg.H_p) &&
              t.states.size() == static_cast<size_t>(cfg.H_p) + 1;
    for (int j = cfg.H_c; ok && j < cfg.H_p; ++j) {
      const auto& a = t.actions[static_cast<size_t>(j)];
      const auto& prev = t.actions[static_cast<size_t>(j - 1)];
      ok = a.speed == prev.speed && std::abs(a.steering) <= std::abs(prev.steering);
    }
    // H_c == H_p: no rules segment.
    if (cfg.H_c < cfg.H_p) {
      ++tapered;
      ok = ok && t.actions.back().steering == 0.0;
    }
    ok = ok && resimulate(t, cfg.vehicle, cfg.substeps) == t.states;
    bad += !ok;
  }
  report(bad == 0, "planner_contract", fmt("1000 random rollouts (%d with a taper segment, %d with H_c = H_p), %d violations",
                                          tapered, 1000 - tapered, bad));
}

void state_mapping() {
  const VehicleParams vp;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const CpmState c{{5 * u(gen), 5 * u(gen)}, 3.14 * u(gen), 0.5 + 0.5 * u(gen), u(gen)};
    const CpmState back = map_sigma_to_cpm(map_cpm_to_sigma(c, vp), vp);
    worst = std::max({worst, distance(back.position, c.position), std::abs(back.yaw - c.yaw),
                      std::abs(back.speed - c.speed),
                      std::abs(back.steering_normalized - c.steering_normalized)});
  }
  const double beta = slip_angle(vp.max_steering, vp);
  const double oracle_beta = std::atan(0.075 / 0.15 * std::tan(31.0 * std::numbers::pi / 180.0));
  const double literal = 0.2915;
  report(worst < 1e-12 && std::abs(beta - oracle_beta) < 1e-4, "state_mapping",
         fmt("1000 round-trips, max error %.1e (limit 1e-12); beta(31 deg) = %.6f rad, independent "
             "atan(l_r/l_wb tan 31 deg) = %.6f, |diff| %.1e (limit 1e-4); the 4-decimal figure 0.2915 "
             "is %.1e off",
             worst, beta, oracle_beta, std::abs(beta - oracle_beta), std::abs(beta - literal)));
}

BenchMatrix only(const BenchMatrix& m, std::initializer_list<const char*> names) {
  BenchMatrix out = m;
  out.environments.clear();
  for (const char* n : names) {
    for (const auto& e : m.environments) {
      if (e.name == n) out.environments.push_back(e);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files.emplace_back(fs::relative(entry.path(), dir).generic_string(), ss.str());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void desk_benchmark() {
  const MapModel& map = test_support::loop_map();
  const BenchMatrix desk = load_matrix(test_support::data_path("matrix_desk.json"));
  BenchOptions opts;
  opts.threads = std::max(1u, std::thread::hardware_concurrency());

  const BenchMatrix sim_only = only(desk, {"sim"});
  const auto t0 = std::chrono::steady_clock::now();
  const auto sim_results = run_matrix(sim_only, map, opts);
  const double secs = seconds_since(t0);
  const EnvironmentSummary sim = summarize(sim_results).front();
  const AggregateStats cra_a = sim.stats(&RunMetrics::cra_a), cra_l = sim.stats(&RunMetrics::cra_l),
                       cd = sim.stats(&RunMetrics::cd), as = sim.stats(&RunMetrics::as);
  const double as_rel = std::abs(as.mean - 0.75) / 0.75;
  report(sim.failed == 0 && sim.runs.size() == 27 && cra_a.mean == 0.0 && cra_l.mean < 5.0 &&
             cd.mean < 0.05 && as_rel < 0.05 && secs < 60.0,
         "desk_benchmark",
         fmt("sim, %zu runs (%zu failed): CRA-A %.3f, CRA-L %.3f m/100 m (limit 5), CD %.4f m (limit "
             "0.05), AS %.4f m/s (%.2f %% from 0.75, limit 5 %%), %.1f s on %u threads (limit 60 s)",
             sim.runs.size(), sim.failed, cra_a.mean, cra_l.mean, cd.mean, as.mean, 100 * as_rel, secs,
             opts.threads));

  const BenchMatrix pair = only(desk, {"sim", "lab"});
  const auto pair_results = run_matrix(pair, map, opts);
  const auto sums = summarize(pair_results);
  const AggregateStats sim_cd = sums[0].stats(&RunMetrics::cd), lab_cd = sums[1].stats(&RunMetrics::cd);
  const AggregateStats sim_l = sums[0].stats(&RunMetrics::cra_l), lab_l = sums[1].stats(&RunMetrics::cra_l);
  report(sums[1].failed == 0 && lab_cd.mean >= sim_cd.mean && lab_l.mean >= sim_l.mean,
         "realism_direction",
         fmt("CD sim %.4f -> lab %.4f m; CRA-L sim %.3f -> lab %.3f m/100 m", sim_cd.mean, lab_cd.mean,
             sim_l.mean, lab_l.mean));

  const fs::path a = test_support::scratch_dir("accept_a");
  const fs::path b = test_support::scratch_dir("accept_b");
  write_results(a, desk, run_matrix(desk, map, opts));
  BenchOptions serial = opts;
  serial.threads = 1;
  write_results(b, desk, run_matrix(desk, map, serial));
  const auto sa = snapshot(a), sb = snapshot(b);
  report(!sa.empty() && sa == sb, "determinism",
         fmt("full desk matrix run twice (%u threads, then 1): %zu vs %zu files, %s", opts.threads,
             sa.size(), sb.size(), sa == sb ? "byte-identical" : "DIFFERENT"));
  fs::remove_all(a);
  fs::remove_all(b);
}

void aggregation() {
  const std::string cell = format_cell({0.37, 1.33, 0.47, 27}, 2);
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
  const double iqm = aggregate(v).iqm;
  report(cell == "0.37 ± 1.33 (0.47)" && iqm == 4.5, "aggregation",
         fmt("cell \"%s\"; IQM([1..8]) = %g", cell.c_str(), iqm));
}

}  // namespace

int main() {
  hysteresis();
  geometry();
  dynamics();
  planner_contract();
  state_mapping();
  desk_benchmark();
  aggregation();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
