/*
 * Copyright 2026 The fanetids Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fanetids/aodv.hpp"
#include "fanetids/sim.hpp"

using namespace fanetids;

namespace {

std::unique_ptr<Network> static_net(const std::vector<Eigen::Vector3d>& pos) {
  NetworkOptions opt;
  opt.cfg.node_count = static_cast<int>(pos.size()) - 1;
  opt.cfg.area = Eigen::Vector3d(5000.0, 5000.0, 300.0);
  opt.cfg.traffic_pairs = 0;
  opt.mobility = false;
  opt.collect_windows = false;
  std::vector<NodeState> nodes(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    nodes[i].id = static_cast<NodeId>(i);
    nodes[i].position = pos[i];
  }
  return std::make_unique<Network>(opt, nodes);
}

Eigen::Vector3d at(double x, double y = 0.0) { return {x, y, 0.0}; }

std::vector<Eigen::Vector3d> chain(int n, double gap = 200.0) {
  std::vector<Eigen::Vector3d> p;
  for (int i = 0; i < n; ++i) p.push_back(at(100.0 + gap * i));
  return p;
}

long count(const NodeLog& log, LogKind kind) {
  return std::count_if(log.begin(), log.end(), [&](const LogRecord& r) { return r.kind == kind; });
}

std::vector<LogRecord> of_kind(const NodeLog& log, LogKind kind) {
  std::vector<LogRecord> out;
  std::copy_if(log.begin(), log.end(), std::back_inserter(out),
               [&](const LogRecord& r) { return r.kind == kind; });
  return out;
}

RouteEntry entry(std::int64_t seq, int hops, SimTime learned) {
  RouteEntry r;
  r.destination = 9;
  r.dest_seq = seq;
  r.hop_count = hops;
  r.learned = learned;
  return r;
}

}  // namespace

TEST_CASE("select_route examples") {
  std::vector<RouteEntry> a{entry(7, 4, 0), entry(5, 3, 1)};
  CHECK(select_route(a).dest_seq == 7);
  std::vector<RouteEntry> one{entry(3, 3, 0)};
  CHECK(select_route(one).hop_count == 3);
  std::vector<RouteEntry> b{entry(5, 3, 0), entry(5, 2, 1)};
  CHECK(select_route(b).hop_count == 2);
}

TEST_CASE("select_route matches a brute-force argmax under every ordering") {
  Rng rng(5);
  std::uniform_int_distribution<int> seq(0, 3), hops(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RouteEntry> c;
    for (int i = 0; i < 5; ++i) c.push_back(entry(seq(rng), hops(rng), i));
    // Oracle: highest seq, then fewest hops, then earliest arrival.
    auto best = std::max_element(c.begin(), c.end(), [](const RouteEntry& x, const RouteEntry& y) {
      return std::tuple(x.dest_seq, -x.hop_count, -x.learned) <
             std::tuple(y.dest_seq, -y.hop_count, -y.learned);
    });
    std::vector<int> perm(c.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<RouteEntry> arrival;
      for (int i : perm) arrival.push_back(c[i]);
      // Arrival order defines "earliest": restamp accordingly.
      for (std::size_t i = 0; i < arrival.size(); ++i) arrival[i].learned = static_cast<SimTime>(i);
      const auto& got = select_route(arrival);
      CHECK(got.dest_seq == best->dest_seq);
      CHECK(got.hop_count == best->hop_count);
      // Among full ties the first in arrival order wins.
      const auto first = std::find_if(arrival.begin(), arrival.end(), [&](const RouteEntry& r) {
        return r.dest_seq == best->dest_seq && r.hop_count == best->hop_count;
      });
      CHECK(got.learned == first->learned);
    } while (trial < 20 && std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("route_preferred ordering") {
  CHECK(route_preferred(entry(8, 9, 0), entry(7, 1, 0)));
  CHECK(route_preferred(entry(7, 1, 0), entry(7, 2, 0)));
  CHECK_FALSE(route_preferred(entry(7, 2, 0), entry(7, 2, 0)));
  CHECK_FALSE(route_preferred(entry(6, 1, 0), entry(7, 5, 0)));
}

TEST_CASE("discovery emits one RREQ with hop count 0 and suppresses repeats") {
  auto net = static_net({at(0), at(2000)});  // destination out of range
  net->schedule_send(from_seconds(0.0), 0, 1);
  net->schedule_send(from_seconds(0.1), 0, 1);
  net->run_until(from_seconds(0.5));
  const auto sends = of_kind(net->log(0), LogKind::kRreqSend);
  REQUIRE(sends.size() == 1);
  CHECK(sends[0].hop_count == 0);
  CHECK(count(net->log(0), LogKind::kDiscovery) == 1);
  CHECK(net->node(0).discovery_pending(1));
}

TEST_CASE("discovery retries, then drops the buffer") {
  auto net = static_net({at(0), at(2000)});
  net->schedule_send(from_seconds(0.0), 0, 1);
  net->run_until(from_seconds(5.0));
  CHECK(count(net->log(0), LogKind::kRreqSend) == 1 + AodvParams{}.rreq_retries);
  CHECK(count(net->log(0), LogKind::kDataDrop) == 1);
  CHECK_FALSE(net->node(0).discovery_pending(1));
}

TEST_CASE("sending to self delivers locally") {
  auto net = static_net({at(0), at(100)});
  net->schedule_send(from_seconds(0.0), 0, 0);
  net->run_until(from_seconds(1.0));
  CHECK(count(net->log(0), LogKind::kRreqSend) == 0);
  CHECK(count(net->log(0), LogKind::kDataRecv) == 1);
  CHECK(net->stats().dormant.data_delivered == 1);
}

TEST_CASE("destination answers with its own sequence number and hop count 0") {
  auto net = static_net(chain(2));
  net->schedule_send(from_seconds(0.0), 0, 1);
  net->run_until(from_seconds(1.0));
  const auto rrep = of_kind(net->log(1), LogKind::kRrepSend);
  REQUIRE(rrep.size() == 1);
  CHECK(rrep[0].hop_count == 0);
  CHECK(rrep[0].dest_seq == net->node(1).own_seq());
  CHECK(count(net->log(1), LogKind::kDataRecv) == 1);
}

TEST_CASE("relay rebroadcasts with hop count + 1") {
  auto net = static_net(chain(3));
  net->schedule_send(from_seconds(0.0), 0, 2);
  net->run_until(from_seconds(1.0));
  const auto fwd = of_kind(net->log(1), LogKind::kRreqFwd);
  REQUIRE(fwd.size() == 1);
  CHECK(fwd[0].hop_count == 1);
  const auto recv = of_kind(net->log(2), LogKind::kRreqRecv);
  REQUIRE(recv.size() == 1);
  CHECK(recv[0].hop_count == 1);
  const auto r = net->node(0).active_route(2);
  REQUIRE(r);
  CHECK(r->hop_count == 2);
  CHECK(r->next_hop == 1);
}

TEST_CASE("diamond: every relay forwards a given RREQ once") {
  // 0 -> {1, 2} -> 3; node 4 is the unreachable target, so the flood runs out.
  auto net = static_net({at(0), at(200, 120), at(200, -120), at(400), at(3000)});
  net->schedule_send(from_seconds(0.0), 0, 4);
  net->run_until(from_seconds(0.5));
  for (NodeId n : {1, 2, 3}) CHECK(count(net->log(n), LogKind::kRreqFwd) == 1);
  CHECK(count(net->log(3), LogKind::kRreqRecv) == 1);
  CHECK(count(net->log(3), LogKind::kRreqDup) == 1);
  CHECK(count(net->log(0), LogKind::kRreqDup) == 2);  // echoes from 1 and 2
}

TEST_CASE("link break at a relay with one precursor sends one RERR upstream") {
  auto net = static_net(chain(4));
  for (int k = 0; k < 6; ++k) net->schedule_send(from_seconds(0.5 * k), 0, 3);
  net->schedule_move(from_seconds(1.2), 3, at(4000));
  net->run_until(from_seconds(1.6));
  const auto& relay = net->log(2);
  CHECK(count(relay, LogKind::kLinkBreak) == 1);
  CHECK(count(relay, LogKind::kRerrSend) == 1);
  CHECK(count(relay, LogKind::kDataDrop) == 1);
  const auto& r2 = net->node(2).routes().at(3);
  CHECK(r2.state == RouteState::kInvalid);
  CHECK(count(net->log(1), LogKind::kRerrRecv) == 1);
  CHECK(net->node(1).routes().at(3).state == RouteState::kInvalid);
  CHECK_FALSE(net->node(0).active_route(3));
}

TEST_CASE("link break without precursors stays local") {
  auto net = static_net(chain(2));
  net->schedule_send(from_seconds(0.0), 0, 1);
  net->schedule_move(from_seconds(0.7), 1, at(4000));
  net->schedule_send(from_seconds(1.0), 0, 1);
  net->run_until(from_seconds(1.1));
  CHECK(count(net->log(0), LogKind::kLinkBreak) == 1);
  CHECK(count(net->log(0), LogKind::kRerrSend) == 0);
  CHECK(net->node(0).routes().at(1).state == RouteState::kInvalid);
  // The packet is buffered behind a fresh discovery.
  CHECK(net->node(0).discovery_pending(1));
}

TEST_CASE("five-node chain cut mid-flow recovers over an alternate node") {
  auto pos = chain(5);
  pos.push_back(at(500, 3000));  // node 5, parked far away
  auto net = static_net(pos);
  net->schedule_flow(from_seconds(1.0), 0, 4);
  net->schedule_move(from_seconds(5.2), 2, at(500, -3000));
  net->schedule_move(from_seconds(5.2), 5, at(500, 100));
  net->run_until(from_seconds(12.0));
  const auto disc = of_kind(net->log(0), LogKind::kDiscovery);
  REQUIRE(disc.size() >= 2);
  CHECK(disc[1].time > from_seconds(5.2));
  const auto recv = of_kind(net->log(4), LogKind::kDataRecv);
  CHECK(std::count_if(recv.begin(), recv.end(), [](const LogRecord& r) {
          return r.time > from_seconds(7.0);
        }) >= 4);
  CHECK(count(net->log(5), LogKind::kDataFwd) >= 4);
  for (const auto& tr : net->delivered_traces()) {
    CHECK(std::set<NodeId>(tr.begin(), tr.end()).size() == tr.size());
  }
}

TEST_CASE("forwarding extends the hop trace") {
  auto net = static_net(chain(4));
  net->schedule_send(from_seconds(0.0), 0, 3);
  net->schedule_send(from_seconds(0.5), 0, 3);
  net->run_until(from_seconds(1.0));
  REQUIRE(net->delivered_traces().size() == 2);
  CHECK(net->delivered_traces()[1] == std::vector<NodeId>{0, 1, 2, 3});
  CHECK(count(net->log(1), LogKind::kDataFwd) == 2);
}

TEST_CASE("TTL bounds the trace") {
  AodvParams p;
  p.ttl = 3;
  NetworkOptions opt;
  opt.cfg.node_count = 5;
  opt.cfg.traffic_pairs = 0;
  opt.mobility = false;
  opt.collect_windows = false;
  opt.aodv = p;
  std::vector<NodeState> nodes(6);
  for (int i = 0; i < 6; ++i) nodes[i].id = i, nodes[i].position = at(100.0 + 200.0 * i);
  Network net(opt, nodes);
  net.schedule_send(from_seconds(0.0), 0, 5);
  net.run_until(from_seconds(3.0));
  CHECK(net.stats().dormant.data_delivered == 0);
}

TEST_CASE("destination sequence numbers never decrease in a table") {
  ScenarioConfig c;
  c.node_count = 12;
  c.area = Eigen::Vector3d(700.0, 700.0, 200.0);
  c.sim_duration = 60.0;
  c.traffic_pairs = 3;
  const auto r = run_scenario(c);
  for (const auto& log : r.node_logs) {
    std::map<NodeId, std::int64_t> last;
    for (const auto& rec : log) {
      if (rec.kind != LogKind::kRouteAdd && rec.kind != LogKind::kRouteUpdate &&
          rec.kind != LogKind::kRouteInvalid) {
        continue;
      }
      auto [it, fresh] = last.emplace(rec.dst, rec.dest_seq);
      if (!fresh) {
        CHECK(rec.dest_seq >= it->second);
        it->second = rec.dest_seq;
      }
    }
  }
}

TEST_CASE("static connected topologies deliver everything after discovery") {
  for (int t = 0; t < 10; ++t) {
    Rng rng(derive_seed(77, t));
    std::uniform_real_distribution<double> u(0.0, 600.0);
    std::vector<Eigen::Vector3d> pos;
    // A grid backbone keeps the topology connected; the rest is random.
    for (int i = 0; i < 4; ++i) pos.push_back(at(150.0 * i, 0.0));
    for (int i = 0; i < 6; ++i) pos.push_back(at(u(rng), u(rng) / 6.0));
    auto net = static_net(pos);
    net->schedule_send(from_seconds(0.0), 0, 3);
    for (int k = 1; k <= 6; ++k) net->schedule_send(from_seconds(1.0 + 0.5 * k), 0, 3);
    net->run_until(from_seconds(6.0));
    CHECK(net->stats().dormant.data_delivered == 7);
    CHECK(net->stats().looped_deliveries == 0);
  }
}
