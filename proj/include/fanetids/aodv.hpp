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

#ifndef FANETIDS_AODV_HPP_
#define FANETIDS_AODV_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "fanetids/attacks.hpp"
#include "fanetids/common.hpp"
#include "fanetids/node_log.hpp"
#include "fanetids/packets.hpp"

namespace fanetids {

struct AodvParams {
  SimTime active_route_timeout = 3 * kMicrosPerSecond;
  SimTime rreq_memory = 5 * kMicrosPerSecond;
  SimTime discovery_timeout = 1 * kMicrosPerSecond;
  int rreq_retries = 2;
  int ttl = 32;
  std::size_t buffer_limit = 64;
};

enum class RouteState { kActive, kInvalid };

struct RouteEntry {
  NodeId destination = kNoNode;
  NodeId next_hop = kNoNode;
  int hop_count = 0;
  std::int64_t dest_seq = 0;
  bool valid_seq = false;
  RouteState state = RouteState::kActive;
  SimTime expiry = 0;
  SimTime learned = 0;  // arrival time of the information that built it
  std::set<NodeId> precursors;
};

// True when `candidate` should replace `incumbent`: higher destination
// sequence number, or equal sequence number and fewer hops. Equal on both
// keeps the incumbent (earliest arrival wins).
bool route_preferred(const RouteEntry& candidate, const RouteEntry& incumbent);

// Best of a nonempty candidate list given in arrival order.
const RouteEntry& select_route(std::span<const RouteEntry> candidates);

enum class DropReason { kNoRoute, kLinkBreak, kTtl, kBlackhole };

// What an AODV node needs from the network it lives in.
class Medium {
 public:
  virtual ~Medium() = default;
  virtual SimTime now() const = 0;
  virtual bool adjacent(NodeId a, NodeId b) const = 0;
  virtual std::span<const NodeId> neighbors_of(NodeId n) const = 0;
  virtual void broadcast(NodeId from, const ControlPacket& pkt) = 0;
  // Returns false, sending nothing, when `to` is out of range.
  virtual bool unicast(NodeId from, NodeId to, Packet pkt) = 0;

  virtual void data_delivered(const DataPacket& pkt) { (void)pkt; }
  virtual void data_dropped(NodeId at, const DataPacket& pkt, DropReason why) {
    (void)at, (void)pkt, (void)why;
  }
  // Returns a tag stamped on the packets this discovery releases.
  virtual int discovery_started(NodeId origin, NodeId dst) {
    (void)origin, (void)dst;
    return -1;
  }
};

// Per-node AODV state machine. Hello messages are not used: a broken link is
// noticed when a unicast to a next hop finds it out of range.
class AodvNode {
 public:
  AodvNode(NodeId id, Medium& medium, NodeLog& log, AodvParams params = {});

  NodeId id() const { return id_; }
  SimTime now() const { return medium_.now(); }
  Medium& medium() { return medium_; }
  const AodvParams& params() const { return params_; }

  void set_attack(const AttackProfile& profile);
  const std::optional<AttackProfile>& attack() const { return attack_; }
  NodeLog& private_log() { return private_log_; }
  const NodeLog& private_log() const { return private_log_; }

  // Application entry point: originate one data packet toward `dst`.
  void send_data(NodeId dst, int size, int seq);

  void receive(NodeId from, const Packet& pkt);

  void initiate_discovery(NodeId dst);
  void handle_rreq(NodeId from, const ControlPacket& pkt);
  void handle_rrep(NodeId from, const ControlPacket& pkt);
  void handle_rerr(NodeId from, const ControlPacket& pkt);
  void forward_data(NodeId from, DataPacket pkt);
  // Returns the precursors that were sent the RERR.
  std::set<NodeId> handle_link_break(NodeId broken_next_hop);

  // Periodic timers: discovery retries and route expiry.
  void housekeeping();
  void neighbors_changed(std::span<const NodeId> added, std::span<const NodeId> removed);
  void log_snapshot();

  // Originates an RREQ with a fresh id; used by discovery and flooding.
  ControlPacket originate_rreq(NodeId dst);
  // Sends an RREP toward `next_hop`; logs kRrepSend.
  void send_rrep(NodeId next_hop, const ControlPacket& rrep);

  std::optional<RouteEntry> active_route(NodeId dst);
  const std::map<NodeId, RouteEntry>& routes() const { return routes_; }
  std::int64_t own_seq() const { return own_seq_; }
  bool discovery_pending(NodeId dst) const { return pending_.contains(dst); }
  Snapshot snapshot() const;

  void log(LogKind kind, NodeId origin = kNoNode, NodeId dst = kNoNode, int hop_count = -1,
           std::int64_t dest_seq = -1, std::string note = {});

 private:
  struct Discovery {
    SimTime deadline = 0;
    int retries_left = 0;
    int tag = -1;
    std::deque<DataPacket> buffer;
  };

  // Inserts or improves a route; returns true when the table changed.
  bool offer_route(NodeId dst, NodeId next_hop, int hop_count, std::int64_t dest_seq,
                   bool valid_seq);
  void refresh(NodeId dst);
  void expire_routes();
  void release_buffer(NodeId dst);
  void drop(const DataPacket& pkt, DropReason why);
  void send_rerr(std::vector<std::pair<NodeId, std::int64_t>> unreachable,
                 const std::set<NodeId>& precursors, bool forwarded);

  NodeId id_;
  Medium& medium_;
  NodeLog& log_;
  NodeLog private_log_;
  AodvParams params_;
  std::optional<AttackProfile> attack_;

  std::int64_t own_seq_ = 0;
  int next_rreq_id_ = 0;
  std::map<NodeId, RouteEntry> routes_;
  std::map<std::pair<NodeId, int>, SimTime> seen_rreqs_;
  std::map<NodeId, Discovery> pending_;
};

}  // namespace fanetids

#endif  // FANETIDS_AODV_HPP_
