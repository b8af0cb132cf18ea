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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tickbench/config.hpp"
#include "tickbench/executor.hpp"
#include "tickbench/map.hpp"
#include "tickbench/metrics.hpp"

namespace tickbench {

/// One row of the report: a run configuration (mode + disturbances).
struct Environment {
  std::string name;
  RunConfig config;
};

struct BenchMatrix {
  uint64_t master_seed = 0;
  std::string policy = "pursuit";
  std::vector<Environment> environments;
  std::vector<uint64_t> policy_seeds;
  std::vector<std::vector<Placement>> placements;  // shared by all environments
  int repetitions = 1;

  size_t runs_per_environment() const {
    return policy_seeds.size() * placements.size() * static_cast<size_t>(repetitions);
  }
  void validate() const;
};

/// {"master_seed","policy","environments":[{"name","preset"?,"config"?}],
///  "policy_seeds":[...],"placements":[[placement...]...],"repetitions"}.
/// An environment's "preset" names a disturbance preset; sim runs direct,
/// twin and lab run the follower. "config" overrides any RunConfig field.
BenchMatrix parse_matrix(const nlohmann::json& doc);
BenchMatrix load_matrix(const std::filesystem::path& file);

struct CellId {
  size_t environment = 0;
  size_t seed_index = 0;
  size_t placement = 0;
  int repetition = 0;

  std::string run_id(uint64_t policy_seed) const;
};

/// Deterministic per-cell seed.
uint64_t cell_seed(uint64_t master, std::string_view environment, uint64_t policy_seed,
                   size_t placement, int repetition);

/// Config actually executed for a cell.
RunConfig cell_config(const BenchMatrix& matrix, const CellId& id);

struct CellResult {
  CellId id;
  std::string run_id;
  uint64_t policy_seed = 0;
  bool ok = false;
  std::string error;
  RunMetrics metrics;
  std::optional<RunRecord> record;
};

struct EnvironmentResults {
  std::string name;
  std::vector<CellResult> cells;  // matrix order
};

struct BenchOptions {
  bool keep_records = true;
  unsigned threads = 1;
  MetricOptions metrics;
};

std::vector<EnvironmentResults> run_matrix(const BenchMatrix& matrix, const MapModel& map,
                                           const BenchOptions& options = {});

struct AggregateStats {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1); 0 when n == 1
  double iqm = 0.0;  // mean after trimming floor(n / 4) from each end
  size_t n = 0;

  bool operator==(const AggregateStats&) const = default;
};

/// Throws std::invalid_argument for an empty sample.
AggregateStats aggregate(std::span<const double> values);

/// Metrics of one environment's successful runs plus its failure count.
struct EnvironmentSummary {
  std::string name;
  std::vector<RunMetrics> runs;
  std::vector<std::string> run_ids;
  size_t failed = 0;

  AggregateStats stats(double RunMetrics::*field) const;
};

std::vector<EnvironmentSummary> summarize(std::span<const EnvironmentResults> results);

enum class ReportFormat { kMarkdown, kCsv, kJson };
ReportFormat parse_report_format(std::string_view name);

/// "mean ± std (iqm)" with the given number of decimals.
std::string format_cell(const AggregateStats& s, int decimals);

std::string emit_report(std::span<const EnvironmentSummary> results, ReportFormat format);

/// Writes logs, per-run metrics and summary.json under `dir`.
void write_results(const std::filesystem::path& dir, const BenchMatrix& matrix,
                   std::span<const EnvironmentResults> results);
/// Rebuilds summaries from the per-run metric files.
std::vector<EnvironmentSummary> load_results(const std::filesystem::path& dir);

/// Run whose CD is closest to its environment's mean CD.
std::string select_closest_cd(const EnvironmentSummary& env);

/// CSV "agent,step,x,y" for one run.
std::string export_trajectories(const RunRecord& record);
/// Selector: "closest-cd" or a run id. Throws std::invalid_argument for an
/// unknown run or empty results.
std::string export_trajectories(const std::filesystem::path& dir, const std::string& environment,
                                const std::string& selector);

}  // namespace tickbench
