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
#include <memory>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fanetids/attacks.hpp"
#include "fanetids/sim.hpp"

using namespace fanetids;

namespace {

std::unique_ptr<Network> static_net(const std::vector<Eigen::Vector3d>& pos, double seconds = 60.0) {
  NetworkOptions opt;
  opt.cfg.node_count = static_cast<int>(pos.size()) - 1;
  opt.cfg.area = Eigen::Vector3d(5000.0, 5000.0, 300.0);
  opt.cfg.sim_duration = seconds;
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

AttackProfile profile(AttackType kind, double from_s = 0.0) {
  AttackProfile p;
  p.kind = kind;
  p.active_from = from_seconds(from_s);
  return p;
}

long count(const NodeLog& log, LogKind kind) {
  return std::count_if(log.begin(), log.end(), [&](const LogRecord& r) { return r.kind == kind; });
}

ScenarioConfig small(AttackType a, double ratio) {
  ScenarioConfig c;
  c.node_count = 12;
  c.area = Eigen::Vector3d(700.0, 700.0, 200.0);
  c.sim_duration = 60.0;
  c.traffic_pairs = 3;
  c.attack_type = a;
  c.attacker_ratio = ratio;
  return c;
}

}  // namespace

TEST_CASE("profile invariants") {
  AttackProfile p;
  CHECK_NOTHROW(p.validate());
  p.flood_burst = 0;
  CHECK_THROWS(p.validate());
  p = AttackProfile{};
  p.flood_period = 0.0;
  CHECK_THROWS(p.validate());
  p = AttackProfile{};
  p.seq_inflation = 0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("sinkhole forges a one-hop reply with an inflated sequence number") {
  auto net = static_net({at(0), at(200), at(3000)});
  net->set_attacker(1, profile(AttackType::kSinkhole));
  ControlPacket rreq;
  rreq.origin = 0;
  rreq.destination = 2;
  rreq.dest_seq = 10;
  const auto fake = attacks::sinkhole_on_rreq(net->node(1), 0, rreq);
  CHECK(fake.kind == ControlKind::kRrep);
  CHECK(fake.dest_seq == 110);
  CHECK(fake.hop_count == 1);
  CHECK(fake.origin == 0);
  CHECK(fake.destination == 2);
  CHECK(count(net->log(1), LogKind::kRrepSend) == 1);
}

TEST_CASE("active sinkhole answers instead of rebroadcasting") {
  auto net = static_net({at(0), at(200), at(400), at(600)});
  net->set_attacker(1, profile(AttackType::kSinkhole));
  net->schedule_send(from_seconds(0.0), 0, 3);
  net->run_until(from_seconds(0.5));
  CHECK(count(net->log(1), LogKind::kRreqFwd) == 0);
  CHECK(count(net->log(1), LogKind::kRrepSend) >= 1);
  const auto r = net->node(0).active_route(3);
  REQUIRE(r);
  CHECK(r->next_hop == 1);
  CHECK(r->dest_seq >= 100);
}

TEST_CASE("dormant sinkhole behaves like a relay") {
  auto net = static_net({at(0), at(200), at(400)});
  net->set_attacker(1, profile(AttackType::kSinkhole, 30.0));
  net->schedule_send(from_seconds(0.0), 0, 2);
  net->run_until(from_seconds(0.5));
  CHECK(count(net->log(1), LogKind::kRreqFwd) == 1);
  const auto r = net->node(0).active_route(2);
  REQUIRE(r);
  CHECK(r->hop_count == 2);
  CHECK(r->dest_seq < 100);
}

TEST_CASE("the forged reply beats a legitimate two-hop route") {
  // Legit path 0-1-2 (2 hops); attacker 3 sits next to the source.
  auto net = static_net({at(0), at(200), at(400), at(0, 200)});
  net->set_attacker(3, profile(AttackType::kSinkhole));
  net->schedule_send(from_seconds(0.0), 0, 2);
  net->run_until(from_seconds(0.5));
  // Both replies to the source's own request arrived.
  int legit_rrep = 0, forged_rrep = 0;
  for (const auto& r : net->log(0)) {
    if (r.kind != LogKind::kRrepRecv || r.origin != 0) continue;
    ++(r.dest_seq >= 100 ? forged_rrep : legit_rrep);
  }
  CHECK(legit_rrep == 1);
  CHECK(forged_rrep == 1);
  const auto r = net->node(0).active_route(2);
  REQUIRE(r);
  CHECK(r->next_hop == 3);
  CHECK(r->hop_count == 2);
  // And select_route agrees on the two candidates.
  RouteEntry legit, fake;
  legit.dest_seq = 10, legit.hop_count = 2;
  fake.dest_seq = 110, fake.hop_count = 1;
  std::vector<RouteEntry> c{legit, fake};
  CHECK(select_route(c).dest_seq == 110);
}

TEST_CASE("blackhole drops data silently but still handles control traffic") {
  auto net = static_net({at(0), at(200), at(400)});
  net->set_attacker(1, profile(AttackType::kBlackhole));
  net->schedule_flow(from_seconds(0.0), 0, 2);
  net->run_until(from_seconds(10.0));
  CHECK(net->stats().dormant.data_sent + net->stats().active.data_sent >= 10);
  CHECK(net->stats().active.data_delivered == 0);
  CHECK(count(net->log(2), LogKind::kDataRecv) == 0);
  CHECK(count(net->log(1), LogKind::kRrepSend) >= 1);
  CHECK(count(net->log(1), LogKind::kRerrSend) == 0);
  CHECK(count(net->log(1), LogKind::kBlackholeDrop) == 0);
  CHECK(count(net->node(1).private_log(), LogKind::kBlackholeDrop) >= 10);
  CHECK(count(net->log(1), LogKind::kDataDrop) == 0);
}

TEST_CASE("dormant blackhole forwards") {
  auto net = static_net({at(0), at(200), at(400)});
  net->set_attacker(1, profile(AttackType::kBlackhole, 30.0));
  net->schedule_flow(from_seconds(0.0), 0, 2);
  net->run_until(from_seconds(10.5));
  CHECK(net->stats().dormant.data_delivered == net->stats().dormant.data_sent);
  CHECK(net->node(1).private_log().empty());
}

TEST_CASE("one flooding tick originates exactly the burst") {
  auto net = static_net({at(0), at(200), at(400)});
  net->set_attacker(0, profile(AttackType::kFlooding, 100.0));  // no scheduled ticks in range
  Rng rng(1);
  const NodeId target = attacks::flooding_tick(net->node(0), rng, 3);
  CHECK(target != 0);
  CHECK(target < 3);
  CHECK(count(net->log(0), LogKind::kRreqSend) == 10);
  net->run_until(from_seconds(0.5));
  // Fresh rreq ids: the neighbor treats none of them as duplicates.
  CHECK(count(net->log(1), LogKind::kRreqDup) == 0);
  CHECK(count(net->log(1), LogKind::kRreqRecv) == 10);
}

TEST_CASE("flooding over a 30 s active window") {
  auto net = static_net({at(0), at(200), at(400)}, 30.0);
  net->set_attacker(0, profile(AttackType::kFlooding, 0.0));
  net->run_until(from_seconds(30.0));
  const long originated = count(net->log(0), LogKind::kRreqSend);
  CHECK(originated == (30 / 3) * 10);
  CHECK(net->stats().active.attack_rreqs == 100);
}

TEST_CASE("dormant flooder sends nothing") {
  auto net = static_net({at(0), at(200)}, 30.0);
  net->set_attacker(0, profile(AttackType::kFlooding, 40.0));
  net->run_until(from_seconds(30.0));
  CHECK(count(net->log(0), LogKind::kRreqSend) == 0);
}

TEST_CASE("flooding targets stay in range and skip the attacker") {
  auto net = static_net({at(0), at(4000), at(8000)});
  net->set_attacker(1, profile(AttackType::kFlooding, 100.0));
  Rng rng(3);
  std::set<NodeId> seen;
  for (int i = 0; i < 200; ++i) seen.insert(attacks::flooding_tick(net->node(1), rng, 3));
  CHECK(seen == std::set<NodeId>{0, 2});
}

TEST_CASE("ground truth round trip") {
  std::vector<GroundTruthEntry> e{{3, AttackType::kSinkhole, from_seconds(300)},
                                  {7, AttackType::kSinkhole, from_seconds(300)}};
  std::stringstream s;
  write_ground_truth(s, e);
  CHECK(read_ground_truth(s) == e);
  std::stringstream empty;
  write_ground_truth(empty, {});
  CHECK(read_ground_truth(empty).empty());
}

TEST_CASE("dormant phase is byte-identical to the benign run") {
  for (AttackType a : {AttackType::kSinkhole, AttackType::kBlackhole, AttackType::kFlooding}) {
    const auto attack = run_scenario(small(a, 0.25));
    auto benign_cfg = small(AttackType::kNone, 0.0);
    benign_cfg.sim_duration *= 2.0;
    const auto benign = run_scenario(benign_cfg);
    REQUIRE(attack.active_from);
    REQUIRE(attack.node_logs.size() == benign.node_logs.size());
    for (std::size_t n = 0; n < attack.node_logs.size(); ++n) {
      std::ostringstream x, y;
      for (const auto& r : attack.node_logs[n]) {
        if (r.time < *attack.active_from) x << format_record(r) << '\n';
      }
      for (const auto& r : benign.node_logs[n]) {
        if (r.time < *attack.active_from) y << format_record(r) << '\n';
      }
      CHECK(x.str() == y.str());
    }
  }
}

TEST_CASE("attack scenarios against the same-seed benign run") {
  auto benign_cfg = small(AttackType::kNone, 0.0);
  benign_cfg.sim_duration *= 2.0;
  const auto bh = run_scenario(small(AttackType::kBlackhole, 0.25));
  const auto fl = run_scenario(small(AttackType::kFlooding, 0.25));
  const auto benign = run_scenario(benign_cfg, false, bh.active_from);

  CHECK(bh.stats.active.delivery_ratio() < benign.stats.active.delivery_ratio());

  const double active_s = to_seconds(fl.end - *fl.active_from);
  const auto floor_count = static_cast<std::int64_t>(fl.attackers.size()) *
                           static_cast<std::int64_t>(std::floor(active_s / 3.0)) * 10;
  CHECK(fl.stats.active.rreq_transmissions >= benign.stats.active.rreq_transmissions + floor_count);
}
