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

#include "tickbench/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <set>

#include "tickbench/dynamics.hpp"
#include "tickbench/errors.hpp"

namespace tickbench {

using nlohmann::json;
using Kind = ProtocolError::Kind;

// --- transport --------------------------------------------------------------

FdChannel::FdChannel(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds) {}

FdChannel::~FdChannel() {
  if (owns_) {
    ::close(read_fd_);
    if (write_fd_ != read_fd_) {
      ::close(write_fd_);
    }
  }
}

void FdChannel::send_line(std::string_view line) {
  std::string data(line);
  data.push_back('\n');
  size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::send(write_fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      n = ::write(write_fd_, data.data() + sent, data.size() - sent);
    }
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw ProtocolError(Kind::kDisconnected, std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<size_t>(n);
  }
}

std::optional<std::string> FdChannel::recv_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (const auto pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      throw ProtocolError(Kind::kTimeout, "no message within the deadline");
    }
    pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw ProtocolError(Kind::kDisconnected, std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) {
      throw ProtocolError(Kind::kTimeout, "no message within the deadline");
    }
    char chunk[65536];
    const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw ProtocolError(Kind::kDisconnected, std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      if (buffer_.empty()) {
        return std::nullopt;
      }
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    buffer_.append(chunk, static_cast<size_t>(n));
  }
}

void FdChannel::close_write() { ::shutdown(write_fd_, SHUT_WR); }

std::pair<std::unique_ptr<FdChannel>, std::unique_ptr<FdChannel>> channel_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    throw std::runtime_error(std::string("socketpair: ") + std::strerror(errno));
  }
  return {std::make_unique<FdChannel>(fds[0], fds[0], true),
          std::make_unique<FdChannel>(fds[1], fds[1], true)};
}

std::unique_ptr<FdChannel> tcp_connect(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw ProtocolError(Kind::kDisconnected, "resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      break;
    }
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw ProtocolError(Kind::kDisconnected, "cannot connect to " + host + ":" + service);
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<FdChannel>(fd, fd, true);
}

TcpListener::TcpListener(uint16_t port, bool loopback_only) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) {
    throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  }
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(loopback_only ? INADDR_LOOPBACK : INADDR_ANY);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 4) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw std::runtime_error("cannot listen on port " + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

std::unique_ptr<FdChannel> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready <= 0) {
    throw ProtocolError(Kind::kTimeout, "no planner connected within the deadline");
  }
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) {
    throw ProtocolError(Kind::kDisconnected, std::string("accept: ") + std::strerror(errno));
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<FdChannel>(fd, fd, true);
}

// --- messages ---------------------------------------------------------------

namespace {

[[noreturn]] void malformed(const std::string& what) { throw ProtocolError(Kind::kMalformed, what); }

const json& field(const json& msg, const char* key) {
  if (!msg.is_object() || !msg.contains(key)) {
    malformed(std::string("message lacks \"") + key + "\"");
  }
  return msg[key];
}

double number(const json& msg, const char* key) {
  const json& v = field(msg, key);
  if (!v.is_number()) {
    malformed(std::string("\"") + key + "\" must be a number");
  }
  return v.get<double>();
}

int64_t integer(const json& msg, const char* key) {
  const json& v = field(msg, key);
  if (!v.is_number_integer()) {
    malformed(std::string("\"") + key + "\" must be an integer");
  }
  return v.get<int64_t>();
}

void expect_type(const json& msg, std::string_view type) {
  const json& t = field(msg, "type");
  if (!t.is_string()) {
    malformed("\"type\" must be a string");
  }
  if (t.get<std::string>() == "error") {
    const std::string detail =
        msg.contains("message") && msg["message"].is_string() ? msg["message"].get<std::string>() : "";
    malformed("peer reported an error: " + detail);
  }
  if (t.get<std::string>() != type) {
    malformed("expected a \"" + std::string(type) + "\" message, got \"" + t.get<std::string>() +
              "\"");
  }
}

void check_version(const json& msg) {
  const json& v = field(msg, "version");
  if (!v.is_number_integer()) {
    malformed("\"version\" must be an integer");
  }
  if (v.get<int64_t>() != kProtocolVersion) {
    throw ProtocolError(Kind::kVersionMismatch,
                        "protocol version " + std::to_string(v.get<int64_t>()) +
                            " not supported (expected " + std::to_string(kProtocolVersion) + ")");
  }
}

// Ids in [0, n) each exactly once; returns the index of each entry by id.
std::vector<size_t> index_by_id(const json& entries, size_t expected, const char* what) {
  if (!entries.is_array()) {
    malformed(std::string("\"") + what + "\" must be an array");
  }
  std::vector<size_t> order(expected, SIZE_MAX);
  for (size_t k = 0; k < entries.size(); ++k) {
    const int64_t id = integer(entries[k], "id");
    if (id < 0 || static_cast<size_t>(id) >= expected) {
      malformed(std::string(what) + ": unexpected agent id " + std::to_string(id));
    }
    if (order[static_cast<size_t>(id)] != SIZE_MAX) {
      malformed(std::string(what) + ": duplicate agent id " + std::to_string(id));
    }
    order[static_cast<size_t>(id)] = k;
  }
  for (size_t id = 0; id < expected; ++id) {
    if (order[id] == SIZE_MAX) {
      malformed(std::string(what) + ": missing agent id " + std::to_string(id));
    }
  }
  return order;
}

}  // namespace

json parse_message(std::string_view line) {
  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::parse_error& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    malformed("message must be an object with a string \"type\"");
  }
  return msg;
}

json encode_hello(const EpisodeInfo& info) {
  json agents = json::array();
  for (size_t i = 0; i < info.reference_paths.size(); ++i) {
    agents.push_back({{"id", i}, {"reference_path", info.reference_paths[i]}});
  }
  return {{"type", "hello"},
          {"version", kProtocolVersion},
          {"dt", info.dt},
          {"H_c", info.H_c},
          {"H_p", info.H_p},
          {"map", json::parse(serialize_map(*info.map))},
          {"agents", std::move(agents)},
          {"seed", info.policy_seed},
          {"vehicle", to_json(info.vehicle)},
          {"peer_prediction",
           info.peer_prediction == PeerPrediction::kFrozen ? "frozen" : "constant-velocity"},
          {"substeps", info.substeps}};
}

Hello decode_hello(const json& msg) {
  expect_type(msg, "hello");
  check_version(msg);
  Hello h;
  h.dt = number(msg, "dt");
  h.H_c = static_cast<int>(integer(msg, "H_c"));
  h.H_p = static_cast<int>(integer(msg, "H_p"));
  if (!(h.dt > 0.0) || h.H_c < 1 || h.H_c > h.H_p) {
    malformed("hello: invalid dt or horizons");
  }
  try {
    h.map = parse_map(field(msg, "map").dump());
  } catch (const std::exception& e) {
    malformed(std::string("hello: bad map: ") + e.what());
  }
  if (msg.contains("agents")) {
    const json& agents = msg["agents"];
    const auto order = index_by_id(agents, agents.is_array() ? agents.size() : 0, "agents");
    for (size_t id = 0; id < order.size(); ++id) {
      const json& name = field(agents[order[id]], "reference_path");
      if (!name.is_string()) {
        malformed("agents: reference_path must be a string");
      }
      h.reference_paths.push_back(name.get<std::string>());
    }
  }
  if (msg.contains("seed")) {
    const json& seed = msg["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<int64_t>() >= 0)) {
      malformed("hello: seed must be a non-negative integer");
    }
    h.policy_seed = seed.get<uint64_t>();
  }
  try {
    if (msg.contains("vehicle")) {
      h.vehicle = parse_vehicle(msg["vehicle"]);
      h.vehicle.validate();
    }
  } catch (const std::exception& e) {
    malformed(std::string("hello: bad vehicle: ") + e.what());
  }
  if (msg.contains("peer_prediction")) {
    const json& p = msg["peer_prediction"];
    if (p == "frozen") {
      h.peer_prediction = PeerPrediction::kFrozen;
    } else if (p == "constant-velocity") {
      h.peer_prediction = PeerPrediction::kConstantVelocity;
    } else {
      malformed("hello: unknown peer_prediction");
    }
  }
  if (msg.contains("substeps")) {
    h.substeps = static_cast<int>(integer(msg, "substeps"));
    if (h.substeps < 1) {
      malformed("hello: substeps must be at least 1");
    }
  }
  return h;
}

json encode_ready() { return {{"type", "ready"}, {"version", kProtocolVersion}}; }

void decode_ready(const json& msg) {
  expect_type(msg, "ready");
  check_version(msg);
}

json encode_tick(const TickRequest& req) {
  json agents = json::array();
  for (size_t i = 0; i < req.agents.size(); ++i) {
    const CpmState& s = req.agents[i];
    agents.push_back({{"id", i},
                      {"x", s.position.x},
                      {"y", s.position.y},
                      {"yaw", s.yaw},
                      {"speed", s.speed},
                      {"steer_norm", s.steering_normalized}});
  }
  return {{"type", "tick"},
          {"step", req.step},
          {"time", req.time},
          {"agents", std::move(agents)},
          {"map_hash", req.map_hash}};
}

TickRequest decode_tick(const json& msg) {
  expect_type(msg, "tick");
  TickRequest req;
  req.step = static_cast<int>(integer(msg, "step"));
  req.time = number(msg, "time");
  const json& hash = field(msg, "map_hash");
  if (!hash.is_string()) {
    malformed("tick: map_hash must be a string");
  }
  req.map_hash = hash.get<std::string>();
  const json& agents = field(msg, "agents");
  const auto order = index_by_id(agents, agents.is_array() ? agents.size() : 0, "agents");
  for (size_t id = 0; id < order.size(); ++id) {
    const json& a = agents[order[id]];
    req.agents.push_back({{number(a, "x"), number(a, "y")},
                          number(a, "yaw"),
                          number(a, "speed"),
                          number(a, "steer_norm")});
  }
  return req;
}

json encode_plan(int step, std::span<const Trajectory> trajectories, const VehicleParams& params) {
  json list = json::array();
  for (size_t i = 0; i < trajectories.size(); ++i) {
    json t = trajectory_to_json(trajectories[i], params);
    t["id"] = i;
    list.push_back(std::move(t));
  }
  return {{"type", "plan"}, {"step", step}, {"trajectories", std::move(list)}};
}

std::vector<Trajectory> decode_plan(const json& msg, int expected_step, size_t n_agent, int H_p,
                                    const VehicleParams& params) {
  expect_type(msg, "plan");
  if (integer(msg, "step") != expected_step) {
    malformed("plan answers step " + std::to_string(integer(msg, "step")) + ", expected " +
              std::to_string(expected_step));
  }
  const json& list = field(msg, "trajectories");
  const auto order = index_by_id(list, n_agent, "trajectories");
  std::vector<Trajectory> out;
  for (size_t id = 0; id < n_agent; ++id) {
    const json& t = list[order[id]];
    if (!field(t, "points").is_array() || t["points"].size() != static_cast<size_t>(H_p) + 1) {
      malformed("trajectory for agent " + std::to_string(id) + " must have H_p + 1 points");
    }
    try {
      out.push_back(trajectory_from_json(t, params));
    } catch (const ParseError& e) {
      malformed(e.what());
    }
  }
  return out;
}

json encode_bye() { return {{"type", "bye"}}; }

RandomStream policy_stream(uint64_t policy_seed, size_t agent) {
  return RandomStream(derive_seed(policy_seed, static_cast<uint64_t>(agent)));
}

// --- bindings ---------------------------------------------------------------

InProcessPlanner::InProcessPlanner(const Policy& policy) : policy_(policy) {}

void InProcessPlanner::begin(const EpisodeInfo& info) {
  info_ = info;
  cfg_ = RunConfig{};
  cfg_.dt = info.dt;
  cfg_.H_c = info.H_c;
  cfg_.H_p = info.H_p;
  cfg_.vehicle = info.vehicle;
  cfg_.peer_prediction = info.peer_prediction;
  cfg_.substeps = info.substeps;
  paths_.clear();
  rngs_.clear();
  for (size_t i = 0; i < info.reference_paths.size(); ++i) {
    paths_.push_back(&info.map->reference_path(info.reference_paths[i]));
    rngs_.push_back(policy_stream(info.policy_seed, i));
  }
}

std::vector<Trajectory> InProcessPlanner::plan(int /*step*/, double time,
                                               std::span<const CpmState> observed) {
  std::vector<Trajectory> out = plan_raw(time, observed);
  for (Trajectory& t : out) {
    t = canonicalize(t, info_.vehicle);
  }
  return out;
}

std::vector<Trajectory> InProcessPlanner::plan_raw(double time, std::span<const CpmState> observed) {
  if (observed.size() != paths_.size()) {
    throw PolicyError("state list size does not match the episode's agents");
  }
  std::vector<SigmaState> states;
  states.reserve(observed.size());
  for (const CpmState& s : observed) {
    states.push_back(map_cpm_to_sigma(s, info_.vehicle));
  }
  PlanContext ctx{info_.map, paths_, &cfg_, time};
  std::vector<Trajectory> out;
  for (size_t a = 0; a < states.size(); ++a) {
    out.push_back(generate_trajectory(policy_, a, states, ctx, rngs_[a]));
  }
  return out;
}

RemotePlanner::RemotePlanner(std::unique_ptr<LineChannel> channel, RemoteTimeouts timeouts)
    : channel_(std::move(channel)), timeouts_(timeouts) {}

json RemotePlanner::receive(std::string_view expecting) {
  const auto line = channel_->recv_line(timeouts_.hard);
  if (!line) {
    throw ProtocolError(Kind::kDisconnected,
                        "planner closed the connection while awaiting " + std::string(expecting));
  }
  return parse_message(*line);
}

void RemotePlanner::begin(const EpisodeInfo& info) {
  info_ = info;
  map_hash_ = map_hash(*info.map);
  if (timeouts_.soft.count() == 0) {
    timeouts_.soft = std::chrono::milliseconds(static_cast<int64_t>(std::ceil(2000.0 * info.dt)));
  }
  channel_->send_line(encode_hello(info).dump());
  decode_ready(receive("ready"));
}

std::vector<Trajectory> RemotePlanner::plan(int step, double time,
                                            std::span<const CpmState> observed) {
  TickRequest req{step, time, {observed.begin(), observed.end()}, map_hash_};
  const auto sent = std::chrono::steady_clock::now();
  channel_->send_line(encode_tick(req).dump());
  const json msg = receive("plan");
  if (std::chrono::steady_clock::now() - sent > timeouts_.soft) {
    ++late_;
  }
  return decode_plan(msg, step, observed.size(), info_.H_p, info_.vehicle);
}

void RemotePlanner::end() {
  try {
    channel_->send_line(encode_bye().dump());
  } catch (const ProtocolError&) {
    // Peer already gone; the episode is complete regardless.
  }
}

int serve_planner_session(LineChannel& channel, const Policy& policy,
                          std::chrono::milliseconds idle_timeout) {
  const auto send_error = [&](const std::string& what) {
    try {
      channel.send_line(json{{"type", "error"}, {"message", what}}.dump());
    } catch (const ProtocolError&) {
    }
  };
  const auto first = channel.recv_line(idle_timeout);
  if (!first) {
    throw ProtocolError(Kind::kDisconnected, "executor closed before the handshake");
  }
  Hello hello;
  try {
    hello = decode_hello(parse_message(*first));
  } catch (const ProtocolError& e) {
    send_error(e.what());
    throw;
  }
  EpisodeInfo info;
  info.dt = hello.dt;
  info.H_c = hello.H_c;
  info.H_p = hello.H_p;
  info.map = &hello.map;
  info.reference_paths = hello.reference_paths;
  info.policy_seed = hello.policy_seed;
  info.vehicle = hello.vehicle;
  info.peer_prediction = hello.peer_prediction;
  info.substeps = hello.substeps;
  InProcessPlanner planner(policy);
  try {
    planner.begin(info);
  } catch (const std::out_of_range& e) {
    send_error(e.what());
    throw ProtocolError(Kind::kMalformed, e.what());
  }
  const std::string expected_hash = map_hash(hello.map);
  channel.send_line(encode_ready().dump());

  int served = 0;
  for (;;) {
    const auto line = channel.recv_line(idle_timeout);
    if (!line) {
      return served;
    }
    const json msg = parse_message(*line);
    if (msg["type"] == "bye") {
      return served;
    }
    TickRequest req;
    try {
      req = decode_tick(msg);
      if (req.map_hash != expected_hash) {
        malformed("tick map_hash does not match the handshake map");
      }
    } catch (const ProtocolError& e) {
      send_error(e.what());
      throw;
    }
    const std::vector<Trajectory> plans = planner.plan_raw(req.time, req.agents);
    channel.send_line(encode_plan(req.step, plans, info.vehicle).dump());
    ++served;
  }
}

}  // namespace tickbench
