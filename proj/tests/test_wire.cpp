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

#include <gtest/gtest.h>

#include <functional>
#include <future>
#include <set>
#include <thread>

#include "support.hpp"
#include "tickbench/dynamics.hpp"
#include "tickbench/errors.hpp"
#include "tickbench/executor.hpp"
#include "tickbench/policy.hpp"
#include "tickbench/wire.hpp"

using namespace tickbench;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

EpisodeInfo loop_info() {
  EpisodeInfo info;
  info.map = &test_support::loop_map();
  info.reference_paths = {"loop", "loop", "loop"};
  info.policy_seed = 77;
  return info;
}

ProtocolError::Kind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ProtocolError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ProtocolError thrown";
  return ProtocolError::Kind::kMalformed;
}

}  // namespace

TEST(Channel, LinesTimeoutsAndClose) {
  auto [a, b] = channel_pair();
  a->send_line("{\"type\":\"bye\"}");
  a->send_line("second");
  EXPECT_EQ(b->recv_line(1s), "{\"type\":\"bye\"}");
  EXPECT_EQ(b->recv_line(1s), "second");
  EXPECT_EQ(kind_of([&] { b->recv_line(20ms); }), ProtocolError::Kind::kTimeout);
  a->close_write();
  EXPECT_EQ(b->recv_line(1s), std::nullopt);
}

TEST(Channel, TcpLoopback) {
  TcpListener listener(0);
  ASSERT_NE(listener.port(), 0);
  auto client = std::async(std::launch::async, [&] { return tcp_connect("127.0.0.1", listener.port()); });
  auto server = listener.accept(2s);
  auto conn = client.get();
  conn->send_line("ping");
  EXPECT_EQ(server->recv_line(1s), "ping");
  server->send_line("pong");
  EXPECT_EQ(conn->recv_line(1s), "pong");
}

TEST(Messages, HelloRoundTrip) {
  EpisodeInfo info = loop_info();
  info.H_c = 3;
  info.H_p = 6;
  info.peer_prediction = PeerPrediction::kFrozen;
  info.substeps = 2;
  const Hello h = decode_hello(json::parse(encode_hello(info).dump()));
  EXPECT_EQ(h.H_c, 3);
  EXPECT_EQ(h.H_p, 6);
  EXPECT_EQ(h.dt, 0.1);
  EXPECT_EQ(h.map, test_support::loop_map());
  EXPECT_EQ(h.reference_paths, info.reference_paths);
  EXPECT_EQ(h.policy_seed, 77u);
  EXPECT_EQ(h.vehicle, VehicleParams{});
  EXPECT_EQ(h.peer_prediction, PeerPrediction::kFrozen);
  EXPECT_EQ(h.substeps, 2);
}

TEST(Messages, VersionMismatchAndMalformedHello) {
  json hello = encode_hello(loop_info());
  hello["version"] = 2;
  EXPECT_EQ(kind_of([&] { decode_hello(hello); }), ProtocolError::Kind::kVersionMismatch);
  hello = encode_hello(loop_info());
  hello.erase("map");
  EXPECT_EQ(kind_of([&] { decode_hello(hello); }), ProtocolError::Kind::kMalformed);
  hello = encode_hello(loop_info());
  hello["H_c"] = 9;
  EXPECT_EQ(kind_of([&] { decode_hello(hello); }), ProtocolError::Kind::kMalformed);
  EXPECT_EQ(kind_of([] { parse_message("not json"); }), ProtocolError::Kind::kMalformed);
  EXPECT_EQ(kind_of([] { parse_message("[1,2]"); }), ProtocolError::Kind::kMalformed);
  EXPECT_EQ(kind_of([] { decode_ready(json{{"type", "ready"}, {"version", 3}}); }),
            ProtocolError::Kind::kVersionMismatch);
}

TEST(Messages, TickRoundTripAndSchema) {
  TickRequest req{4, 0.4, {{{1.0, 2.0}, 0.3, 0.5, -0.2}, {{-1.0, 0.5}, -2.0, 0.0, 0.9}}, "abc"};
  const json msg = encode_tick(req);
  std::set<std::string> keys;
  for (const auto& item : msg.items()) keys.insert(item.key());
  EXPECT_EQ(keys, (std::set<std::string>{"type", "step", "time", "agents", "map_hash"}));
  const TickRequest back = decode_tick(json::parse(msg.dump()));
  EXPECT_EQ(back.step, 4);
  EXPECT_EQ(back.time, 0.4);
  EXPECT_EQ(back.agents, req.agents);
  EXPECT_EQ(back.map_hash, "abc");
}

TEST(Messages, PlanValidation) {
  const auto policy = make_policy("pursuit", VehicleParams{});
  InProcessPlanner planner(*policy);
  const EpisodeInfo info = loop_info();
  planner.begin(info);
  RunConfig cfg;
  const auto agents = resolve_placements(cfg, test_support::loop_map());
  std::vector<CpmState> obs;
  for (const auto& a : agents) obs.push_back(map_sigma_to_cpm(a.state, info.vehicle));
  const auto raw = planner.plan_raw(0.0, obs);
  const auto plans = planner.plan(0, 0.0, obs);
  const json msg = json::parse(encode_plan(0, raw, info.vehicle).dump());
  EXPECT_EQ(decode_plan(msg, 0, 3, 8, info.vehicle), plans);

  EXPECT_EQ(kind_of([&] { decode_plan(msg, 1, 3, 8, info.vehicle); }), ProtocolError::Kind::kMalformed);
  json missing = msg;
  missing["trajectories"].erase(1);
  EXPECT_EQ(kind_of([&] { decode_plan(missing, 0, 3, 8, info.vehicle); }), ProtocolError::Kind::kMalformed);
  json dup = msg;
  dup["trajectories"][1]["id"] = 0;
  EXPECT_EQ(kind_of([&] { decode_plan(dup, 0, 3, 8, info.vehicle); }), ProtocolError::Kind::kMalformed);
  json short_traj = msg;
  short_traj["trajectories"][2]["points"].erase(0);
  EXPECT_EQ(kind_of([&] { decode_plan(short_traj, 0, 3, 8, info.vehicle); }), ProtocolError::Kind::kMalformed);
  json error = {{"type", "error"}, {"message", "boom"}};
  EXPECT_EQ(kind_of([&] { decode_plan(error, 0, 3, 8, info.vehicle); }), ProtocolError::Kind::kMalformed);
}

TEST(Remote, LoopbackEpisodeMatchesInProcess) {
  for (const char* preset : {"sim", "lab"}) {
    RunConfig cfg;
    cfg.seed = 5;
    cfg.steps = 60;
    cfg.disturbance = disturbance_preset(preset);
    cfg.mode = std::string(preset) == "sim" ? ExecutionMode::kDirect : ExecutionMode::kFollow;
    const auto policy = make_policy("random", cfg.vehicle);
    InProcessPlanner local(*policy);
    const RunRecord expected = run_episode(cfg, test_support::loop_map(), local);

    auto [exec_end, planner_end] = channel_pair();
    auto server = std::async(std::launch::async, [&, ch = std::move(planner_end)] {
      return serve_planner_session(*ch, *policy, 5s);
    });
    RemotePlanner remote(std::move(exec_end));
    const RunRecord got = run_episode(cfg, test_support::loop_map(), remote);
    EXPECT_EQ(server.get(), 60);
    EXPECT_EQ(got, expected) << preset;
  }
}

TEST(Remote, TcpEpisodeMatchesInProcess) {
  RunConfig cfg;
  cfg.steps = 30;
  const auto policy = make_policy("pursuit", cfg.vehicle);
  InProcessPlanner local(*policy);
  const RunRecord expected = run_episode(cfg, test_support::loop_map(), local);
  TcpListener listener(0);
  auto server = std::async(std::launch::async, [&] {
    auto ch = tcp_connect("127.0.0.1", listener.port());
    return serve_planner_session(*ch, *policy, 5s);
  });
  RemotePlanner remote(listener.accept(2s));
  EXPECT_EQ(run_episode(cfg, test_support::loop_map(), remote), expected);
  EXPECT_EQ(server.get(), 30);
}

TEST(Remote, DisconnectAndTimeout) {
  RunConfig cfg;
  cfg.steps = 5;
  {
    auto [exec_end, planner_end] = channel_pair();
    planner_end.reset();
    RemotePlanner remote(std::move(exec_end));
    EXPECT_EQ(kind_of([&] { run_episode(cfg, test_support::loop_map(), remote); }),
              ProtocolError::Kind::kDisconnected);
  }
  {
    auto [exec_end, planner_end] = channel_pair();
    RemotePlanner remote(std::move(exec_end), RemoteTimeouts{0ms, 50ms});
    EXPECT_EQ(kind_of([&] { run_episode(cfg, test_support::loop_map(), remote); }),
              ProtocolError::Kind::kTimeout);
  }
}

TEST(Remote, ServerRejectsVersionMismatch) {
  auto [exec_end, planner_end] = channel_pair();
  json hello = encode_hello(loop_info());
  hello["version"] = 2;
  exec_end->send_line(hello.dump());
  const auto policy = make_policy("pursuit", VehicleParams{});
  EXPECT_EQ(kind_of([&] { serve_planner_session(*planner_end, *policy, 1s); }),
            ProtocolError::Kind::kVersionMismatch);
  const auto reply = exec_end->recv_line(1s);
  ASSERT_TRUE(reply.has_value());
  EXPECT_EQ(json::parse(*reply)["type"], "error");
}

TEST(Remote, ServerRejectsForeignMapHash) {
  auto [exec_end, planner_end] = channel_pair();
  exec_end->send_line(encode_hello(loop_info()).dump());
  TickRequest req{0, 0.0, {{}, {}, {}}, "0000000000000000"};
  exec_end->send_line(encode_tick(req).dump());
  const auto policy = make_policy("pursuit", VehicleParams{});
  EXPECT_EQ(kind_of([&] { serve_planner_session(*planner_end, *policy, 1s); }),
            ProtocolError::Kind::kMalformed);
}
