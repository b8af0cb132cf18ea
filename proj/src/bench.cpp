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

#include "tickbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tickbench/errors.hpp"
#include "tickbench/policy.hpp"
#include "tickbench/random.hpp"
#include "tickbench/wire.hpp"

namespace tickbench {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& doc, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!doc.is_object()) {
    throw ParseError(std::string(where) + ": expected an object");
  }
  for (const auto& item : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ParseError(std::string(where) + ": unknown key \"" + item.key() + "\"");
    }
  }
}

uint64_t as_seed(const json& v, std::string_view where) {
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<int64_t>() >= 0)) {
    return v.get<uint64_t>();
  }
  throw ParseError(std::string(where) + ": seeds must be non-negative integers");
}

Environment parse_environment(const json& doc) {
  check_keys(doc, {"name", "preset", "config"}, "environment");
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw ParseError("environment: \"name\" must be a string");
  }
  json cfg = json::object();
  std::string preset;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) {
      throw ParseError("environment: \"preset\" must be a string");
    }
    preset = doc["preset"].get<std::string>();
    disturbance_preset(preset);  // rejects unknown names
    cfg["disturbance"] = preset;
    cfg["mode"] = preset == "sim" ? "direct" : "follow";
  }
  if (doc.contains("config")) {
    const json& over = doc["config"];
    if (!over.is_object()) {
      throw ParseError("environment: \"config\" must be an object");
    }
    for (const auto& item : over.items()) {
      if (item.key() == "disturbance" && item.value().is_object() && !preset.empty() &&
          !item.value().contains("preset")) {
        json d = item.value();
        d["preset"] = preset;
        cfg["disturbance"] = std::move(d);
      } else {
        cfg[item.key()] = item.value();
      }
    }
  }
  return {doc["name"].get<std::string>(), parse_config(cfg)};
}

json matrix_to_json(const BenchMatrix& m) {
  json envs = json::array();
  for (const Environment& e : m.environments) {
    envs.push_back({{"name", e.name}, {"config", to_json(e.config)}});
  }
  json placements = json::array();
  for (const auto& set : m.placements) {
    RunConfig holder;
    holder.placements = set;
    placements.push_back(to_json(holder)["placements"]);
  }
  return {{"master_seed", m.master_seed},
          {"policy", m.policy},
          {"environments", std::move(envs)},
          {"policy_seeds", m.policy_seeds},
          {"placements", std::move(placements)},
          {"repetitions", m.repetitions}};
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct MetricColumn {
  const char* key;
  const char* header;
  double RunMetrics::*field;
  int decimals;
};

constexpr MetricColumn kColumns[] = {
    {"cra_a", "CRA-A ↓ [events/100 m]", &RunMetrics::cra_a, 2},
    {"cra_l", "CRA-L ↓ [m/100 m]", &RunMetrics::cra_l, 2},
    {"cd", "CD ↓ [m]", &RunMetrics::cd, 3},
    {"as", "AS ↑ [m/s]", &RunMetrics::as, 3},
};

json stats_json(const AggregateStats& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"iqm", s.iqm}, {"n", s.n}};
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + file.string());
  }
  out << text;
}

json read_json(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open " + file.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

}  // namespace

void BenchMatrix::validate() const {
  if (environments.empty() || policy_seeds.empty() || placements.empty()) {
    throw ConfigError("matrix: environments, policy_seeds and placements must be non-empty");
  }
  if (repetitions < 1) {
    throw ConfigError("matrix: repetitions must be at least 1");
  }
  std::set<std::string> names;
  for (const Environment& e : environments) {
    if (e.name.empty() || e.name.find_first_of("/\\") != std::string::npos || e.name == "." ||
        e.name == "..") {
      throw ConfigError("matrix: environment name \"" + e.name + "\" is not a valid directory name");
    }
    if (!names.insert(e.name).second) {
      throw ConfigError("matrix: duplicate environment \"" + e.name + "\"");
    }
  }
  if (std::set<uint64_t>(policy_seeds.begin(), policy_seeds.end()).size() != policy_seeds.size()) {
    throw ConfigError("matrix: duplicate policy seed");
  }
  for (size_t e = 0; e < environments.size(); ++e) {
    for (size_t p = 0; p < placements.size(); ++p) {
      cell_config(*this, {e, 0, p, 0}).validate();
    }
  }
}

BenchMatrix parse_matrix(const json& doc) {
  check_keys(doc,
             {"master_seed", "policy", "environments", "policy_seeds", "placements", "repetitions"},
             "matrix");
  BenchMatrix m;
  if (doc.contains("master_seed")) {
    m.master_seed = as_seed(doc["master_seed"], "matrix");
  }
  if (doc.contains("policy")) {
    if (!doc["policy"].is_string()) {
      throw ParseError("matrix: \"policy\" must be a string");
    }
    m.policy = doc["policy"].get<std::string>();
  }
  if (!doc.contains("environments") || !doc["environments"].is_array()) {
    throw ParseError("matrix: \"environments\" must be an array");
  }
  for (const json& e : doc["environments"]) {
    m.environments.push_back(parse_environment(e));
  }
  if (!doc.contains("policy_seeds") || !doc["policy_seeds"].is_array()) {
    throw ParseError("matrix: \"policy_seeds\" must be an array");
  }
  for (const json& s : doc["policy_seeds"]) {
    m.policy_seeds.push_back(as_seed(s, "matrix"));
  }
  if (!doc.contains("placements") || !doc["placements"].is_array()) {
    throw ParseError("matrix: \"placements\" must be an array of placement lists");
  }
  for (const json& set : doc["placements"]) {
    m.placements.push_back(parse_config(json{{"placements", set}}).placements);
  }
  if (doc.contains("repetitions")) {
    if (!doc["repetitions"].is_number_integer()) {
      throw ParseError("matrix: \"repetitions\" must be an integer");
    }
    m.repetitions = doc["repetitions"].get<int>();
  }
  m.validate();
  return m;
}

BenchMatrix load_matrix(const fs::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw ParseError("cannot open matrix file " + file.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("matrix: ") + e.what());
  }
  return parse_matrix(doc);
}

std::string CellId::run_id(uint64_t policy_seed) const {
  return "s" + std::to_string(policy_seed) + "-p" + std::to_string(placement) + "-r" +
         std::to_string(repetition);
}

uint64_t cell_seed(uint64_t master, std::string_view environment, uint64_t policy_seed,
                   size_t placement, int repetition) {
  uint64_t s = derive_seed(master, environment);
  s = derive_seed(s, policy_seed);
  s = derive_seed(s, static_cast<uint64_t>(placement));
  return derive_seed(s, static_cast<uint64_t>(repetition));
}

RunConfig cell_config(const BenchMatrix& matrix, const CellId& id) {
  const Environment& env = matrix.environments.at(id.environment);
  const uint64_t policy_seed = matrix.policy_seeds.at(id.seed_index);
  RunConfig cfg = env.config;
  cfg.placements = matrix.placements.at(id.placement);
  if (!cfg.placements.empty()) {
    cfg.n_agent = static_cast<int>(cfg.placements.size());
  }
  // Shared by every environment, so policy streams and placements pair up.
  uint64_t s = derive_seed(matrix.master_seed, "cell");
  s = derive_seed(s, policy_seed);
  s = derive_seed(s, static_cast<uint64_t>(id.placement));
  cfg.seed = derive_seed(s, static_cast<uint64_t>(id.repetition));
  cfg.disturbance.noise_seed =
      derive_seed(cell_seed(matrix.master_seed, env.name, policy_seed, id.placement, id.repetition),
                  env.config.disturbance.noise_seed);
  return cfg;
}

std::vector<EnvironmentResults> run_matrix(const BenchMatrix& matrix, const MapModel& map,
                                           const BenchOptions& options) {
  matrix.validate();
  std::vector<EnvironmentResults> results;
  std::vector<CellResult*> order;
  for (size_t e = 0; e < matrix.environments.size(); ++e) {
    results.push_back({matrix.environments[e].name, {}});
  }
  for (size_t e = 0; e < matrix.environments.size(); ++e) {
    auto& cells = results[e].cells;
    for (size_t si = 0; si < matrix.policy_seeds.size(); ++si) {
      for (size_t p = 0; p < matrix.placements.size(); ++p) {
        for (int r = 0; r < matrix.repetitions; ++r) {
          CellResult c;
          c.id = {e, si, p, r};
          c.policy_seed = matrix.policy_seeds[si];
          c.run_id = c.id.run_id(c.policy_seed);
          cells.push_back(std::move(c));
        }
      }
    }
  }
  for (auto& env : results) {
    for (auto& c : env.cells) {
      order.push_back(&c);
    }
  }

  const auto run_cell = [&](CellResult& c) {
    try {
      const RunConfig cfg = cell_config(matrix, c.id);
      const auto policy = make_policy(matrix.policy, cfg.vehicle);
      InProcessPlanner planner(*policy);
      RunRecord record = run_episode(cfg, map, planner);
      c.metrics = compute_metrics(record, map, options.metrics);
      c.ok = true;
      if (options.keep_records) {
        c.record = std::move(record);
      }
    } catch (const std::exception& e) {
      c.ok = false;
      c.error = e.what();
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, order.size()));
  if (threads == 1) {
    for (CellResult* c : order) {
      run_cell(*c);
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < order.size(); i = next++) {
          run_cell(*order[i]);
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  return results;
}

AggregateStats aggregate(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("aggregate: empty sample");
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  AggregateStats s;
  s.n = n;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double x : v) {
      ss += (x - s.mean) * (x - s.mean);
    }
    s.std = std::sqrt(ss / static_cast<double>(n - 1));
  }
  const size_t trim = n / 4;
  s.iqm = std::accumulate(v.begin() + static_cast<ptrdiff_t>(trim),
                          v.end() - static_cast<ptrdiff_t>(trim), 0.0) /
          static_cast<double>(n - 2 * trim);
  return s;
}

AggregateStats EnvironmentSummary::stats(double RunMetrics::*field) const {
  std::vector<double> values;
  values.reserve(runs.size());
  for (const RunMetrics& m : runs) {
    values.push_back(m.*field);
  }
  return aggregate(values);
}

std::vector<EnvironmentSummary> summarize(std::span<const EnvironmentResults> results) {
  std::vector<EnvironmentSummary> out;
  for (const EnvironmentResults& env : results) {
    EnvironmentSummary s;
    s.name = env.name;
    for (const CellResult& c : env.cells) {
      if (c.ok) {
        s.runs.push_back(c.metrics);
        s.run_ids.push_back(c.run_id);
      } else {
        ++s.failed;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "md" || name == "markdown") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw ConfigError("unknown report format \"" + std::string(name) + "\"");
}

std::string format_cell(const AggregateStats& s, int decimals) {
  std::string cell = fixed(s.mean, decimals) + " ± " + fixed(s.std, decimals) + " (" +
                     fixed(s.iqm, decimals) + ")";
  if (s.n == 1) {
    cell += " [n=1]";
  }
  return cell;
}

std::string emit_report(std::span<const EnvironmentSummary> results, ReportFormat format) {
  if (results.empty()) {
    throw std::invalid_argument("report: no environments");
  }
  std::ostringstream out;
  switch (format) {
    case ReportFormat::kMarkdown: {
      out << "| Environment | Runs |";
      for (const auto& c : kColumns) out << ' ' << c.header << " |";
      out << "\n|---|---|";
      for (size_t i = 0; i < std::size(kColumns); ++i) out << "---|";
      out << '\n';
      for (const auto& env : results) {
        out << "| " << env.name << " | " << env.runs.size();
        if (env.failed > 0) out << " (" << env.failed << " failed)";
        out << " |";
        for (const auto& c : kColumns) {
          out << ' ' << (env.runs.empty() ? "n/a" : format_cell(env.stats(c.field), c.decimals))
              << " |";
        }
        out << '\n';
      }
      break;
    }
    case ReportFormat::kCsv: {
      out << "environment,n,failed";
      for (const auto& c : kColumns) {
        out << ',' << c.key << "_mean," << c.key << "_std," << c.key << "_iqm";
      }
      out << '\n';
      for (const auto& env : results) {
        out << env.name << ',' << env.runs.size() << ',' << env.failed;
        for (const auto& c : kColumns) {
          if (env.runs.empty()) {
            out << ",,,";
            continue;
          }
          const AggregateStats s = env.stats(c.field);
          out << ',' << shortest(s.mean) << ',' << shortest(s.std) << ',' << shortest(s.iqm);
        }
        out << '\n';
      }
      break;
    }
    case ReportFormat::kJson: {
      json envs = json::array();
      for (const auto& env : results) {
        json e = {{"name", env.name}, {"n", env.runs.size()}, {"failed", env.failed}};
        for (const auto& c : kColumns) {
          e[c.key] = env.runs.empty() ? json(nullptr) : stats_json(env.stats(c.field));
        }
        envs.push_back(std::move(e));
      }
      out << json{{"environments", std::move(envs)}}.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

void write_results(const fs::path& dir, const BenchMatrix& matrix,
                   std::span<const EnvironmentResults> results) {
  fs::create_directories(dir);
  write_text(dir / "matrix.json", matrix_to_json(matrix).dump(2) + "\n");
  json envs = json::array();
  for (const EnvironmentResults& env : results) {
    const fs::path env_dir = dir / env.name;
    fs::create_directories(env_dir);
    json runs = json::array();
    for (const CellResult& c : env.cells) {
      json doc = {{"run_id", c.run_id}, {"policy_seed", c.policy_seed}, {"ok", c.ok}};
      if (c.ok) {
        doc["metrics"] = to_json(c.metrics);
      } else {
        doc["error"] = c.error;
      }
      if (c.record) {
        save_run(*c.record, env_dir / c.run_id);
      }
      write_text(env_dir / (c.run_id + ".metrics.json"), doc.dump(2) + "\n");
      runs.push_back(c.run_id);
    }
    envs.push_back({{"name", env.name}, {"runs", std::move(runs)}});
  }
  const auto summaries = summarize(results);
  json doc = json::parse(emit_report(summaries, ReportFormat::kJson));
  for (size_t i = 0; i < envs.size(); ++i) {
    doc["environments"][i]["runs"] = envs[i]["runs"];
  }
  write_text(dir / "summary.json", doc.dump(2) + "\n");
}

std::vector<EnvironmentSummary> load_results(const fs::path& dir) {
  const json summary = read_json(dir / "summary.json");
  std::vector<EnvironmentSummary> out;
  for (const json& env : summary.at("environments")) {
    EnvironmentSummary s;
    s.name = env.at("name").get<std::string>();
    for (const json& id : env.at("runs")) {
      const std::string run_id = id.get<std::string>();
      const json doc = read_json(dir / s.name / (run_id + ".metrics.json"));
      if (doc.at("ok").get<bool>()) {
        s.runs.push_back(metrics_from_json(doc.at("metrics")));
        s.run_ids.push_back(run_id);
      } else {
        ++s.failed;
      }
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) {
    throw std::invalid_argument("results in " + dir.string() + " are empty");
  }
  return out;
}

std::string select_closest_cd(const EnvironmentSummary& env) {
  if (env.runs.empty()) {
    throw std::invalid_argument("environment \"" + env.name + "\" has no successful runs");
  }
  const double mean = env.stats(&RunMetrics::cd).mean;
  size_t best = 0;
  for (size_t i = 1; i < env.runs.size(); ++i) {
    if (std::abs(env.runs[i].cd - mean) < std::abs(env.runs[best].cd - mean)) {
      best = i;
    }
  }
  return env.run_ids[best];
}

std::string export_trajectories(const RunRecord& record) {
  std::string out = "agent,step,x,y\n";
  for (size_t a = 0; a < record.n_agent(); ++a) {
    for (size_t k = 0; k < record.states.size(); ++k) {
      const Vec2& p = record.states[k][a].position;
      out += std::to_string(a) + ',' + std::to_string(k) + ',' + shortest(p.x) + ',' +
             shortest(p.y) + '\n';
    }
  }
  return out;
}

std::string export_trajectories(const fs::path& dir, const std::string& environment,
                                const std::string& selector) {
  const auto summaries = load_results(dir);
  const auto env = std::find_if(summaries.begin(), summaries.end(),
                                [&](const EnvironmentSummary& s) { return s.name == environment; });
  if (env == summaries.end()) {
    throw std::invalid_argument("unknown environment \"" + environment + "\"");
  }
  std::string run_id = selector;
  if (selector == "closest-cd") {
    run_id = select_closest_cd(*env);
  } else if (std::find(env->run_ids.begin(), env->run_ids.end(), selector) == env->run_ids.end()) {
    throw std::invalid_argument("unknown run \"" + selector + "\" in environment \"" +
                                environment + "\"");
  }
  const fs::path stem = dir / environment / run_id;
  if (!fs::exists(stem.string() + ".jsonl")) {
    throw std::invalid_argument("run \"" + run_id + "\" has no trajectory log");
  }
  return export_trajectories(load_run(stem));
}

}  // namespace tickbench
