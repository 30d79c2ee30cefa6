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

// Discrete-event engine: event queue, range-disc radio, mobility ticks,
// constant-bit-rate traffic and window bookkeeping around AODV nodes.

#ifndef FANETIDS_SIM_HPP_
#define FANETIDS_SIM_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fanetids/aodv.hpp"
#include "fanetids/attacks.hpp"
#include "fanetids/mobility.hpp"
#include "fanetids/node_log.hpp"
#include "fanetids/packets.hpp"
#include "fanetids/scenario_config.hpp"

namespace fanetids {

constexpr SimTime kHopLatency = 2'000;  // 2 ms

// Declaration order is the tie-break rank for simultaneous events. Windows
// close first so that an event at a boundary belongs to the next window.
enum class EventKind { kWindowClose, kMobilityTick, kAttackTick, kAppSend, kPacketArrival };

struct MoveTo {
  NodeId node = kNoNode;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};
struct AppSend {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  bool periodic = false;
};
struct Arrival {
  NodeId from = kNoNode;
  Packet packet;
};

struct SimEvent {
  SimTime time = 0;
  EventKind kind = EventKind::kMobilityTick;
  NodeId node = kNoNode;
  std::uint64_t seq = 0;
  std::variant<std::monostate, MoveTo, AppSend, Arrival> payload;
};

// Total order: (time, kind rank, node id, insertion sequence).
struct EventLater {
  bool operator()(const SimEvent& a, const SimEvent& b) const;
};

class EventQueue {
 public:
  void push(SimEvent ev);
  SimEvent pop();
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  SimTime next_time() const { return heap_.top().time; }

 private:
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventLater> heap_;
  std::uint64_t next_seq_ = 0;
};

struct PhaseStats {
  std::int64_t data_sent = 0;
  std::int64_t data_delivered = 0;
  std::int64_t rreq_transmissions = 0;  // originated + forwarded
  std::int64_t rreq_originated = 0;
  std::int64_t attack_rreqs = 0;  // originated by flooding ticks

  double delivery_ratio() const {
    return data_sent == 0 ? 0.0 : static_cast<double>(data_delivered) / data_sent;
  }
};

struct NetworkStats {
  PhaseStats dormant;  // everything before the active phase (whole run if benign)
  PhaseStats active;
  std::int64_t looped_deliveries = 0;
  std::int64_t delivered_latency_us = 0;
  // Discoveries started in the active phase by a node with an attacker in
  // range, and how many of them released packets that reached an attacker.
  std::int64_t discoveries_near_attacker = 0;
  std::int64_t discoveries_through_attacker = 0;
};

struct NetworkOptions {
  ScenarioConfig cfg;
  bool mobility = true;
  bool record_trace = false;
  bool collect_windows = true;
  // Boundary between the two PhaseStats buckets. Defaults to the start of
  // the active phase; lets a benign run be measured over the same interval.
  std::optional<SimTime> stats_split;
  AodvParams aodv;
};

class Network final : public Medium {
 public:
  // `initial` holds one state per node, ids 0..n-1 in order.
  Network(NetworkOptions options, std::vector<NodeState> initial);

  // Medium.
  SimTime now() const override { return now_; }
  bool adjacent(NodeId a, NodeId b) const override;
  std::span<const NodeId> neighbors_of(NodeId n) const override;
  void broadcast(NodeId from, const ControlPacket& pkt) override;
  bool unicast(NodeId from, NodeId to, Packet pkt) override;
  void data_delivered(const DataPacket& pkt) override;
  void data_dropped(NodeId at, const DataPacket& pkt, DropReason why) override;
  int discovery_started(NodeId origin, NodeId dst) override;

  void set_attacker(NodeId node, const AttackProfile& profile);
  void schedule_send(SimTime at, NodeId src, NodeId dst);
  void schedule_flow(SimTime first, NodeId src, NodeId dst);
  void schedule_move(SimTime at, NodeId node, const Eigen::Vector3d& position);

  // Processes every event with time <= `until`.
  void run_until(SimTime until);

  int size() const { return static_cast<int>(nodes_.size()); }
  AodvNode& node(NodeId id) { return *agents_[id]; }
  const NodeState& state(NodeId id) const { return nodes_[id]; }
  const NodeLog& log(NodeId id) const { return logs_[id]; }
  std::vector<NodeLog> take_logs() { return std::move(logs_); }
  const NetworkStats& stats() const { return stats_; }
  const std::vector<std::string>& trace() const { return trace_; }
  const std::vector<std::vector<NodeId>>& delivered_traces() const { return delivered_traces_; }
  std::int64_t window_closes() const { return window_closes_; }

 private:
  void dispatch(const SimEvent& ev);
  void mobility_tick(SimTime t);
  void recompute_adjacency(bool log_changes);
  void close_window();
  void attack_tick(NodeId attacker);
  void app_send(const SimEvent& ev);
  void arrival(NodeId to, const Arrival& a);
  PhaseStats& phase_stats(SimTime t);
  void trace_event(const SimEvent& ev);

  NetworkOptions opt_;
  std::vector<NodeState> nodes_;
  std::vector<Rng> mobility_rngs_;
  Adjacency adjacency_;
  std::vector<NodeLog> logs_;
  std::vector<std::unique_ptr<AodvNode>> agents_;
  std::set<NodeId> attackers_;
  std::optional<SimTime> active_from_;
  Rng flood_rng_;
  EventQueue queue_;
  SimTime now_ = 0;
  SimTime run_end_ = 0;
  std::map<std::pair<NodeId, NodeId>, int> next_seq_;
  std::int64_t window_closes_ = 0;
  NetworkStats stats_;
  std::vector<bool> tag_through_attacker_;
  std::vector<std::string> trace_;
  std::vector<std::vector<NodeId>> delivered_traces_;
};

struct ScenarioResult {
  ScenarioConfig cfg;
  std::vector<NodeId> sources;
  std::vector<NodeId> destinations;
  std::vector<NodeId> attackers;
  std::optional<SimTime> active_from;
  SimTime end = 0;
  std::vector<NodeLog> node_logs;  // index = node id, GBS last
  std::map<NodeId, NodeLog> attacker_logs;
  std::vector<std::string> trace;
  NetworkStats stats;
  std::int64_t window_closes = 0;  // summed over nodes

  std::vector<GroundTruthEntry> ground_truth() const;
};

// Initial node states for a scenario (GBS at the area center, speed 0).
std::vector<NodeState> initial_states(const ScenarioConfig& cfg);

// Full seeded scenario. Throws ConfigError on an invalid configuration.
ScenarioResult run_scenario(const ScenarioConfig& cfg, bool record_trace = false,
                            std::optional<SimTime> stats_split = std::nullopt);

// Writes node_<id>.log, attacker_<id>.log, ground_truth.txt, scenario.cfg,
// summary.txt and, if recorded, trace.log into `dir`.
void write_scenario(const ScenarioResult& result, const std::filesystem::path& dir);

}  // namespace fanetids

#endif  // FANETIDS_SIM_HPP_
