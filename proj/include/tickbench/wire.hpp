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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tickbench/config.hpp"
#include "tickbench/map.hpp"
#include "tickbench/planner.hpp"
#include "tickbench/types.hpp"

namespace tickbench {

inline constexpr int kProtocolVersion = 1;

/// Newline-delimited message transport.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void send_line(std::string_view line) = 0;
  /// Next line without the trailing newline; nullopt on orderly close.
  /// Throws ProtocolError(kTimeout) when nothing arrives within `timeout`.
  virtual std::optional<std::string> recv_line(std::chrono::milliseconds timeout) = 0;
};

/// Channel over a pair of file descriptors (socket, pipe, stdio).
class FdChannel final : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, bool owns_fds);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void send_line(std::string_view line) override;
  std::optional<std::string> recv_line(std::chrono::milliseconds timeout) override;

  /// Shuts down the write direction so the peer sees end-of-stream.
  void close_write();

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
  std::string buffer_;
};

/// Two connected in-process endpoints (socketpair).
std::pair<std::unique_ptr<FdChannel>, std::unique_ptr<FdChannel>> channel_pair();

std::unique_ptr<FdChannel> tcp_connect(const std::string& host, uint16_t port);

class TcpListener {
 public:
  /// Port 0 picks an ephemeral port on the loopback interface.
  explicit TcpListener(uint16_t port, bool loopback_only = true);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }
  std::unique_ptr<FdChannel> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

// --- messages -------------------------------------------------------------

struct EpisodeInfo {
  double dt = 0.1;
  int H_c = 5;
  int H_p = 8;
  const MapModel* map = nullptr;
  std::vector<std::string> reference_paths;  // per agent id
  uint64_t policy_seed = 0;
  VehicleParams vehicle;
  PeerPrediction peer_prediction = PeerPrediction::kConstantVelocity;
  int substeps = 1;
};

struct Hello {
  int version = kProtocolVersion;
  double dt = 0.1;
  int H_c = 5;
  int H_p = 8;
  MapModel map;
  std::vector<std::string> reference_paths;
  uint64_t policy_seed = 0;
  VehicleParams vehicle;
  PeerPrediction peer_prediction = PeerPrediction::kConstantVelocity;
  int substeps = 1;
};

struct TickRequest {
  int step = 0;
  double time = 0.0;
  std::vector<CpmState> agents;  // indexed by id
  std::string map_hash;
};

nlohmann::json encode_hello(const EpisodeInfo& info);
/// Throws ProtocolError: kVersionMismatch for a version other than ours,
/// kMalformed for schema violations.
Hello decode_hello(const nlohmann::json& msg);

nlohmann::json encode_ready();
void decode_ready(const nlohmann::json& msg);

nlohmann::json encode_tick(const TickRequest& req);
TickRequest decode_tick(const nlohmann::json& msg);

nlohmann::json encode_plan(int step, std::span<const Trajectory> trajectories,
                           const VehicleParams& params);
/// Requires exactly one trajectory per agent id in [0, n_agent) and H_p + 1
/// points each.
std::vector<Trajectory> decode_plan(const nlohmann::json& msg, int expected_step, size_t n_agent,
                                    int H_p, const VehicleParams& params);

nlohmann::json encode_bye();

/// Parses one line as a JSON object. Throws ProtocolError(kMalformed).
nlohmann::json parse_message(std::string_view line);

// --- executor-side planner bindings ----------------------------------------

/// The executor's view of a planner: state list in, trajectories out.
class PlannerBinding {
 public:
  virtual ~PlannerBinding() = default;
  virtual void begin(const EpisodeInfo& info) = 0;
  virtual std::vector<Trajectory> plan(int step, double time,
                                       std::span<const CpmState> observed) = 0;
  virtual void end() {}
  /// Responses that missed the soft deadline.
  virtual int late_responses() const { return 0; }
};

/// Runs the rollout planner with a local policy.
class InProcessPlanner final : public PlannerBinding {
 public:
  explicit InProcessPlanner(const Policy& policy);
  void begin(const EpisodeInfo& info) override;
  std::vector<Trajectory> plan(int step, double time, std::span<const CpmState> observed) override;
  /// Rollouts before canonicalization; what a serving planner encodes.
  std::vector<Trajectory> plan_raw(double time, std::span<const CpmState> observed);

 private:
  const Policy& policy_;
  EpisodeInfo info_;
  RunConfig cfg_;
  std::vector<const ReferencePath*> paths_;
  std::vector<RandomStream> rngs_;
};

struct RemoteTimeouts {
  std::chrono::milliseconds soft{0};  // 0: twice the tick period
  std::chrono::milliseconds hard{5000};
};

/// Talks to an external planner over a LineChannel.
class RemotePlanner final : public PlannerBinding {
 public:
  RemotePlanner(std::unique_ptr<LineChannel> channel, RemoteTimeouts timeouts = {});
  void begin(const EpisodeInfo& info) override;
  std::vector<Trajectory> plan(int step, double time, std::span<const CpmState> observed) override;
  void end() override;
  int late_responses() const override { return late_; }

 private:
  nlohmann::json receive(std::string_view expecting);

  std::unique_ptr<LineChannel> channel_;
  RemoteTimeouts timeouts_;
  EpisodeInfo info_;
  std::string map_hash_;
  int late_ = 0;
};

/// Planner side of the protocol: answers hello and tick messages with the
/// rollout planner until the executor says bye or closes. Returns the number
/// of ticks served.
int serve_planner_session(LineChannel& channel, const Policy& policy,
                          std::chrono::milliseconds idle_timeout = std::chrono::seconds(30));

/// Per-agent policy stream shared by both sides of the protocol.
RandomStream policy_stream(uint64_t policy_seed, size_t agent);

}  // namespace tickbench
