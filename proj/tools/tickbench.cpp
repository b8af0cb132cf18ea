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

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "tickbench/bench.hpp"
#include "tickbench/config.hpp"
#include "tickbench/errors.hpp"
#include "tickbench/executor.hpp"
#include "tickbench/map.hpp"
#include "tickbench/metrics.hpp"
#include "tickbench/policy.hpp"
#include "tickbench/wire.hpp"

namespace tb = tickbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEpisode = 3;
constexpr int kExitProtocol = 4;

std::string strip_suffix(const std::string& path, const std::string& suffix) {
  if (path.size() > suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return path.substr(0, path.size() - suffix.size());
  }
  return path;
}

tb::RunConfig load_run_config(const std::string& config_path, const std::string& mode) {
  tb::RunConfig cfg = config_path.empty() ? tb::RunConfig{} : tb::load_config(config_path);
  if (mode == "direct") {
    cfg.mode = tb::ExecutionMode::kDirect;
  } else if (mode == "follow") {
    cfg.mode = tb::ExecutionMode::kFollow;
  } else if (!mode.empty()) {
    throw tb::ConfigError("--mode must be direct or follow");
  }
  cfg.validate();
  return cfg;
}

void finish_run(const tb::RunRecord& record, const tb::MapModel& map, const std::string& out) {
  if (!out.empty()) {
    tb::save_run(record, strip_suffix(out, ".jsonl"));
  }
  try {
    const tb::RunMetrics m = tb::compute_metrics(record, map);
    std::fprintf(stderr, "CRA-A %.4f  CRA-L %.4f  CD %.5f  AS %.5f  distance %.3f m  resets %zu\n",
                 m.cra_a, m.cra_l, m.cd, m.as, m.total_distance, record.resets.size());
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "metrics unavailable: %s\n", e.what());
  }
  if (record.late_responses > 0) {
    std::fprintf(stderr, "%d planner responses missed the soft deadline\n", record.late_responses);
  }
}

struct SimulateArgs {
  std::string map, config, policy = "pursuit", mode, out;
};

void cmd_simulate(const SimulateArgs& a) {
  const tb::MapModel map = tb::load_map(a.map);
  const tb::RunConfig cfg = load_run_config(a.config, a.mode);
  std::unique_ptr<tb::PlannerBinding> planner;
  std::unique_ptr<tb::Policy> policy;
  if (a.policy == "stdio") {
    planner = std::make_unique<tb::RemotePlanner>(std::make_unique<tb::FdChannel>(0, 1, false));
  } else if (a.policy.rfind("wire:", 0) == 0) {
    const std::string endpoint = a.policy.substr(5);
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos) {
      throw tb::ConfigError("--policy wire:HOST:PORT expected");
    }
    const int port = std::stoi(endpoint.substr(colon + 1));
    planner = std::make_unique<tb::RemotePlanner>(
        tb::tcp_connect(endpoint.substr(0, colon), static_cast<uint16_t>(port)));
  } else {
    policy = tb::make_policy(a.policy, cfg.vehicle);
    planner = std::make_unique<tb::InProcessPlanner>(*policy);
  }
  finish_run(tb::run_episode(cfg, map, *planner), map, a.out);
}

struct ServeArgs {
  std::string map, config, mode, out;
  int port = 0;
  int accept_timeout_s = 60;
};

void cmd_serve(const ServeArgs& a) {
  const tb::MapModel map = tb::load_map(a.map);
  const tb::RunConfig cfg = load_run_config(a.config, a.mode);
  tb::TcpListener listener(static_cast<uint16_t>(a.port), false);
  std::fprintf(stderr, "waiting for a planner on port %u\n", listener.port());
  tb::RemotePlanner planner(listener.accept(std::chrono::seconds(a.accept_timeout_s)));
  finish_run(tb::run_episode(cfg, map, planner), map, a.out);
}

struct BenchArgs {
  std::string matrix, map, out;
  unsigned threads = 0;
  bool no_logs = false;
};

void cmd_bench(const BenchArgs& a) {
  const tb::MapModel map = tb::load_map(a.map);
  const tb::BenchMatrix matrix = tb::load_matrix(a.matrix);
  tb::BenchOptions opts;
  opts.threads = a.threads > 0 ? a.threads : std::max(1u, std::thread::hardware_concurrency());
  opts.keep_records = !a.no_logs;
  const auto results = tb::run_matrix(matrix, map, opts);
  tb::write_results(a.out, matrix, results);
  for (const auto& env : results) {
    for (const auto& c : env.cells) {
      if (!c.ok) {
        std::fprintf(stderr, "%s/%s failed: %s\n", env.name.c_str(), c.run_id.c_str(), c.error.c_str());
      }
    }
  }
  const auto summaries = tb::summarize(results);
  std::cout << tb::emit_report(summaries, tb::ReportFormat::kMarkdown);
}

void write_or_print(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!(f << text)) {
    throw std::runtime_error("cannot write " + out);
  }
}

struct PlannerArgs {
  std::string policy = "pursuit";
  std::string connect;
  int listen = -1;
  bool stdio = false;
  int idle_timeout_s = 30;
};

void cmd_planner(const PlannerArgs& a) {
  // Vehicle limits arrive in the handshake; the policy only needs defaults here.
  const auto policy = tb::make_policy(a.policy, tb::VehicleParams{});
  const auto idle = std::chrono::seconds(a.idle_timeout_s);
  std::unique_ptr<tb::LineChannel> channel;
  if (a.stdio) {
    channel = std::make_unique<tb::FdChannel>(0, 1, false);
  } else if (!a.connect.empty()) {
    const auto colon = a.connect.rfind(':');
    if (colon == std::string::npos) {
      throw tb::ConfigError("--connect HOST:PORT expected");
    }
    channel = tb::tcp_connect(a.connect.substr(0, colon),
                              static_cast<uint16_t>(std::stoi(a.connect.substr(colon + 1))));
  } else if (a.listen >= 0) {
    tb::TcpListener listener(static_cast<uint16_t>(a.listen), false);
    std::fprintf(stderr, "planner listening on port %u\n", listener.port());
    channel = listener.accept(idle);
  } else {
    throw tb::ConfigError("planner needs --stdio, --connect or --listen");
  }
  const int ticks = tb::serve_planner_session(*channel, *policy, idle);
  std::fprintf(stderr, "served %d ticks\n", ticks);
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  CLI::App app{"Multi-agent motion-planning simulator and benchmark harness"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one episode");
  simulate->add_option("--map", sim.map, "Map JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--config", sim.config, "Run config JSON")->check(CLI::ExistingFile);
  simulate->add_option("--policy", sim.policy, "constant|pursuit|random|wire:HOST:PORT|stdio");
  simulate->add_option("--mode", sim.mode, "direct|follow (overrides the config)");
  simulate->add_option("--out", sim.out, "Run log (.jsonl); a .meta.json sidecar is written too");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Run one episode driven by an external planner over TCP");
  serve->add_option("--port", srv.port, "Listen port (0 picks one)")->required();
  serve->add_option("--map", srv.map, "Map JSON")->required()->check(CLI::ExistingFile);
  serve->add_option("--config", srv.config, "Run config JSON")->check(CLI::ExistingFile);
  serve->add_option("--mode", srv.mode, "direct|follow (overrides the config)");
  serve->add_option("--out", srv.out, "Run log (.jsonl)");
  serve->add_option("--accept-timeout", srv.accept_timeout_s, "Seconds to wait for the planner");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Run a benchmark matrix");
  bench->add_option("--matrix", bn.matrix, "Matrix JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--map", bn.map, "Map JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", bn.out, "Results directory")->required();
  bench->add_option("--threads", bn.threads, "Worker threads (0: all cores)");
  bench->add_flag("--no-logs", bn.no_logs, "Write metrics only");

  std::string report_in, report_format = "md", report_out;
  auto* report = app.add_subcommand("report", "Summarize a results directory");
  report->add_option("--in", report_in, "Results directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--format", report_format, "md|csv|json");
  report->add_option("--out", report_out, "Output file (default stdout)");

  std::string export_in, export_env, export_select = "closest-cd", export_out;
  auto* exp = app.add_subcommand("export", "Per-agent positions of one run as CSV");
  exp->add_option("--in", export_in, "Results directory")->required()->check(CLI::ExistingDirectory);
  exp->add_option("--env", export_env, "Environment (default: the first)");
  exp->add_option("--select", export_select, "closest-cd or a run id");
  exp->add_option("--out", export_out, "Output CSV (default stdout)");

  PlannerArgs pl;
  auto* planner = app.add_subcommand("planner", "Reference planner endpoint");
  planner->group("");
  planner->add_option("--policy", pl.policy, "constant|pursuit|random");
  planner->add_option("--connect", pl.connect, "HOST:PORT of a serving executor");
  planner->add_option("--listen", pl.listen, "Accept one executor on this port");
  planner->add_flag("--stdio", pl.stdio, "Speak the protocol on stdin/stdout");
  planner->add_option("--idle-timeout", pl.idle_timeout_s, "Seconds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      cmd_simulate(sim);
    } else if (*serve) {
      cmd_serve(srv);
    } else if (*bench) {
      cmd_bench(bn);
    } else if (*report) {
      write_or_print(tb::emit_report(tb::load_results(report_in), tb::parse_report_format(report_format)),
                     report_out);
    } else if (*exp) {
      std::string env = export_env;
      if (env.empty()) {
        env = tb::load_results(export_in).front().name;
      }
      write_or_print(tb::export_trajectories(export_in, env, export_select), export_out);
    } else if (*planner) {
      cmd_planner(pl);
    }
  } catch (const tb::ProtocolError& e) {
    std::fprintf(stderr, "protocol error: %s\n", e.what());
    return kExitProtocol;
  } catch (const tb::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const tb::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const tb::ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const tb::EpisodeError& e) {
    std::fprintf(stderr, "episode failed: %s\n", e.what());
    return kExitEpisode;
  } catch (const tb::PolicyError& e) {
    std::fprintf(stderr, "episode failed: %s\n", e.what());
    return kExitEpisode;
  } catch (const tb::GeometryError& e) {
    std::fprintf(stderr, "episode failed: %s\n", e.what());
    return kExitEpisode;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitOk;
}
