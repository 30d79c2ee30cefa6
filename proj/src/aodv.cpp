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

#include "fanetids/aodv.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace fanetids {
namespace {

std::string_view reason_name(DropReason why) {
  switch (why) {
    case DropReason::kNoRoute: return "no_route";
    case DropReason::kLinkBreak: return "link_break";
    case DropReason::kTtl: return "ttl";
    case DropReason::kBlackhole: return "blackhole";
  }
  return "?";
}

std::string kv(std::string_view key, std::int64_t v) {
  return std::string(key) + "=" + std::to_string(v);
}

}  // namespace

bool route_preferred(const RouteEntry& candidate, const RouteEntry& incumbent) {
  if (candidate.dest_seq != incumbent.dest_seq) return candidate.dest_seq > incumbent.dest_seq;
  return candidate.hop_count < incumbent.hop_count;
}

const RouteEntry& select_route(std::span<const RouteEntry> candidates) {
  assert(!candidates.empty());
  const RouteEntry* best = &candidates.front();
  for (const auto& c : candidates.subspan(1)) {
    if (route_preferred(c, *best)) best = &c;
  }
  return *best;
}

AodvNode::AodvNode(NodeId id, Medium& medium, NodeLog& log, AodvParams params)
    : id_(id), medium_(medium), log_(log), params_(params) {}

void AodvNode::set_attack(const AttackProfile& profile) {
  profile.validate();
  attack_ = profile;
}

void AodvNode::log(LogKind kind, NodeId origin, NodeId dst, int hop_count, std::int64_t dest_seq,
                   std::string note) {
  NodeLog& target = kind == LogKind::kBlackholeDrop ? private_log_ : log_;
  target.push_back(LogRecord{now(), kind, origin, dst, hop_count, dest_seq, std::move(note)});
}

std::optional<RouteEntry> AodvNode::active_route(NodeId dst) {
  auto it = routes_.find(dst);
  if (it == routes_.end() || it->second.state != RouteState::kActive ||
      it->second.expiry < now()) {
    return std::nullopt;
  }
  return it->second;
}

Snapshot AodvNode::snapshot() const {
  Snapshot s;
  int hops = 0;
  for (const auto& [dst, r] : routes_) {
    if (r.state == RouteState::kActive && r.expiry >= medium_.now()) {
      ++s.active_routes;
      hops += r.hop_count;
    }
  }
  if (s.active_routes > 0) s.mean_hop_count = static_cast<double>(hops) / s.active_routes;
  s.neighbor_count = static_cast<int>(medium_.neighbors_of(id_).size());
  return s;
}

void AodvNode::log_snapshot() { log(LogKind::kSnapshot, id_, kNoNode, -1, -1, encode_snapshot(snapshot())); }

bool AodvNode::offer_route(NodeId dst, NodeId next_hop, int hop_count, std::int64_t dest_seq,
                           bool valid_seq) {
  if (dst == id_) return false;
  RouteEntry cand;
  cand.destination = dst;
  cand.next_hop = next_hop;
  cand.hop_count = hop_count;
  cand.dest_seq = dest_seq;
  cand.valid_seq = valid_seq;
  cand.state = RouteState::kActive;
  cand.expiry = now() + params_.active_route_timeout;
  cand.learned = now();

  auto it = routes_.find(dst);
  if (it == routes_.end()) {
    routes_.emplace(dst, cand);
    log(LogKind::kRouteAdd, id_, dst, hop_count, dest_seq, kv("via", next_hop));
    return true;
  }
  RouteEntry& cur = it->second;
  const bool usable = cur.state == RouteState::kActive && cur.expiry >= now();
  const bool replace = usable ? route_preferred(cand, cur) : cand.dest_seq >= cur.dest_seq;
  if (!replace) {
    // Same path heard again keeps the route alive.
    if (usable && cur.next_hop == next_hop && cur.hop_count == hop_count) {
      cur.expiry = std::max(cur.expiry, cand.expiry);
    }
    return false;
  }
  cand.precursors = std::move(cur.precursors);
  const bool was_usable = usable;
  cur = std::move(cand);
  log(was_usable ? LogKind::kRouteUpdate : LogKind::kRouteAdd, id_, dst, hop_count, dest_seq,
      kv("via", next_hop));
  return true;
}

void AodvNode::refresh(NodeId dst) {
  auto it = routes_.find(dst);
  if (it != routes_.end() && it->second.state == RouteState::kActive) {
    it->second.expiry = std::max(it->second.expiry, now() + params_.active_route_timeout);
  }
}

ControlPacket AodvNode::originate_rreq(NodeId dst) {
  ++own_seq_;
  ControlPacket pkt;
  pkt.kind = ControlKind::kRreq;
  pkt.origin = id_;
  pkt.destination = dst;
  pkt.rreq_id = ++next_rreq_id_;
  pkt.origin_seq = own_seq_;
  if (auto it = routes_.find(dst); it != routes_.end()) pkt.dest_seq = it->second.dest_seq;
  seen_rreqs_[{id_, pkt.rreq_id}] = now();
  log(LogKind::kRreqSend, id_, dst, 0, pkt.dest_seq, kv("id", pkt.rreq_id));
  medium_.broadcast(id_, pkt);
  return pkt;
}

void AodvNode::initiate_discovery(NodeId dst) {
  if (dst == id_ || pending_.contains(dst)) return;
  Discovery d;
  d.deadline = now() + params_.discovery_timeout;
  d.retries_left = params_.rreq_retries;
  d.tag = medium_.discovery_started(id_, dst);
  pending_.emplace(dst, std::move(d));
  log(LogKind::kDiscovery, id_, dst);
  originate_rreq(dst);
}

void AodvNode::send_data(NodeId dst, int size, int seq) {
  DataPacket pkt;
  pkt.src = id_;
  pkt.dst = dst;
  pkt.seq = seq;
  pkt.size = size;
  pkt.created = now();
  pkt.trace.push_back(id_);
  log(LogKind::kDataOrig, id_, dst, 0, -1, kv("seq", seq));
  forward_data(kNoNode, std::move(pkt));
}

void AodvNode::receive(NodeId from, const Packet& pkt) {
  if (const auto* c = std::get_if<ControlPacket>(&pkt)) {
    switch (c->kind) {
      case ControlKind::kRreq: handle_rreq(from, *c); break;
      case ControlKind::kRrep: handle_rrep(from, *c); break;
      case ControlKind::kRerr: handle_rerr(from, *c); break;
    }
  } else {
    forward_data(from, std::get<DataPacket>(pkt));
  }
}

void AodvNode::handle_rreq(NodeId from, const ControlPacket& pkt) {
  const std::pair<NodeId, int> key{pkt.origin, pkt.rreq_id};
  if (auto it = seen_rreqs_.find(key);
      it != seen_rreqs_.end() && now() - it->second < params_.rreq_memory) {
    log(LogKind::kRreqDup, pkt.origin, pkt.destination, pkt.hop_count, pkt.dest_seq);
    return;
  }
  if (from == kNoNode) {
    log(LogKind::kCtrlDrop, pkt.origin, pkt.destination, pkt.hop_count, pkt.dest_seq,
        "why=no_prev_hop");
    return;
  }
  seen_rreqs_[key] = now();
  log(LogKind::kRreqRecv, pkt.origin, pkt.destination, pkt.hop_count, pkt.dest_seq,
      kv("from", from));

  // Reverse route toward the originator, and a direct route to the sender.
  offer_route(pkt.origin, from, pkt.hop_count + 1, pkt.origin_seq, true);
  refresh(pkt.origin);
  if (from != pkt.origin) {
    auto it = routes_.find(from);
    offer_route(from, from, 1, it == routes_.end() ? 0 : it->second.dest_seq, false);
  }

  if (pkt.destination == id_) {
    own_seq_ = std::max(own_seq_, pkt.dest_seq);
    ControlPacket rrep;
    rrep.kind = ControlKind::kRrep;
    rrep.origin = pkt.origin;
    rrep.destination = id_;
    rrep.dest_seq = own_seq_;
    rrep.hop_count = 0;
    send_rrep(from, rrep);
    return;
  }

  if (attack_ && attack_->fabricates_routes(now())) {
    attacks::sinkhole_on_rreq(*this, from, pkt);
    return;
  }

  if (auto route = active_route(pkt.destination);
      route && route->dest_seq >= pkt.dest_seq && route->next_hop != from) {
    routes_[pkt.destination].precursors.insert(from);
    if (auto rev = routes_.find(pkt.origin); rev != routes_.end()) {
      rev->second.precursors.insert(route->next_hop);
    }
    ControlPacket rrep;
    rrep.kind = ControlKind::kRrep;
    rrep.origin = pkt.origin;
    rrep.destination = pkt.destination;
    rrep.dest_seq = route->dest_seq;
    rrep.hop_count = route->hop_count;
    send_rrep(from, rrep);
    return;
  }

  if (pkt.hop_count + 1 >= params_.ttl) {
    log(LogKind::kCtrlDrop, pkt.origin, pkt.destination, pkt.hop_count, pkt.dest_seq, "why=ttl");
    return;
  }
  ControlPacket fwd = pkt;
  fwd.hop_count += 1;
  if (auto it = routes_.find(pkt.destination); it != routes_.end()) {
    fwd.dest_seq = std::max(fwd.dest_seq, it->second.dest_seq);
  }
  log(LogKind::kRreqFwd, fwd.origin, fwd.destination, fwd.hop_count, fwd.dest_seq);
  medium_.broadcast(id_, fwd);
}

void AodvNode::send_rrep(NodeId next_hop, const ControlPacket& rrep) {
  log(LogKind::kRrepSend, rrep.origin, rrep.destination, rrep.hop_count, rrep.dest_seq);
  if (!medium_.unicast(id_, next_hop, rrep)) {
    log(LogKind::kCtrlDrop, rrep.origin, rrep.destination, rrep.hop_count, rrep.dest_seq,
        "why=out_of_range");
  }
}

void AodvNode::handle_rrep(NodeId from, const ControlPacket& pkt) {
  std::int64_t known = 0;
  if (auto it = routes_.find(pkt.destination); it != routes_.end()) known = it->second.dest_seq;
  log(LogKind::kRrepRecv, pkt.origin, pkt.destination, pkt.hop_count, pkt.dest_seq,
      kv("delta", pkt.dest_seq - known));

  if (from != pkt.destination) {
    auto it = routes_.find(from);
    offer_route(from, from, 1, it == routes_.end() ? 0 : it->second.dest_seq, false);
  }
  const bool changed = offer_route(pkt.destination, from, pkt.hop_count + 1, pkt.dest_seq, true);

  if (pkt.origin == id_) {
    if (active_route(pkt.destination)) release_buffer(pkt.destination);
    return;
  }
  if (!changed) return;
  auto rev = active_route(pkt.origin);
  if (!rev) {
    log(LogKind::kCtrlDrop, pkt.origin, pkt.destination, pkt.hop_count, pkt.dest_seq,
        "why=no_reverse");
    return;
  }
  routes_[pkt.destination].precursors.insert(rev->next_hop);
  routes_[pkt.origin].precursors.insert(from);
  refresh(pkt.origin);
  ControlPacket fwd = pkt;
  fwd.hop_count += 1;
  log(LogKind::kRrepFwd, fwd.origin, fwd.destination, fwd.hop_count, fwd.dest_seq);
  if (!medium_.unicast(id_, rev->next_hop, fwd)) {
    log(LogKind::kCtrlDrop, fwd.origin, fwd.destination, fwd.hop_count, fwd.dest_seq,
        "why=out_of_range");
  }
}

void AodvNode::send_rerr(std::vector<std::pair<NodeId, std::int64_t>> unreachable,
                         const std::set<NodeId>& precursors, bool forwarded) {
  if (unreachable.empty() || precursors.empty()) return;
  ControlPacket pkt;
  pkt.kind = ControlKind::kRerr;
  pkt.origin = id_;
  const auto n = static_cast<std::int64_t>(unreachable.size());
  pkt.unreachable = std::move(unreachable);
  log(forwarded ? LogKind::kRerrFwd : LogKind::kRerrSend, id_, kNoNode, -1, -1, kv("n", n));
  if (precursors.size() == 1) {
    medium_.unicast(id_, *precursors.begin(), pkt);
  } else {
    medium_.broadcast(id_, pkt);
  }
}

void AodvNode::handle_rerr(NodeId from, const ControlPacket& pkt) {
  log(LogKind::kRerrRecv, from, kNoNode, -1, -1,
      kv("n", static_cast<std::int64_t>(pkt.unreachable.size())));
  std::vector<std::pair<NodeId, std::int64_t>> lost;
  std::set<NodeId> notify;
  for (const auto& [dst, seq] : pkt.unreachable) {
    auto it = routes_.find(dst);
    if (it == routes_.end()) continue;
    RouteEntry& r = it->second;
    if (r.state != RouteState::kActive || r.next_hop != from) continue;
    r.state = RouteState::kInvalid;
    r.dest_seq = std::max(r.dest_seq, seq);
    log(LogKind::kRouteInvalid, id_, dst, r.hop_count, r.dest_seq, "why=rerr");
    lost.emplace_back(dst, r.dest_seq);
    notify.insert(r.precursors.begin(), r.precursors.end());
    r.precursors.clear();
  }
  send_rerr(std::move(lost), notify, true);
}

std::set<NodeId> AodvNode::handle_link_break(NodeId broken_next_hop) {
  log(LogKind::kLinkBreak, id_, broken_next_hop);
  std::vector<std::pair<NodeId, std::int64_t>> lost;
  std::set<NodeId> notify;
  for (auto& [dst, r] : routes_) {
    if (r.state != RouteState::kActive || r.next_hop != broken_next_hop) continue;
    r.state = RouteState::kInvalid;
    ++r.dest_seq;
    log(LogKind::kRouteInvalid, id_, dst, r.hop_count, r.dest_seq, "why=link_break");
    lost.emplace_back(dst, r.dest_seq);
    notify.insert(r.precursors.begin(), r.precursors.end());
    r.precursors.clear();
  }
  notify.erase(broken_next_hop);
  send_rerr(std::move(lost), notify, false);
  return notify;
}

void AodvNode::drop(const DataPacket& pkt, DropReason why) {
  log(LogKind::kDataDrop, pkt.src, pkt.dst, static_cast<int>(pkt.trace.size()) - 1, -1,
      "why=" + std::string(reason_name(why)));
  medium_.data_dropped(id_, pkt, why);
}

void AodvNode::forward_data(NodeId from, DataPacket pkt) {
  const bool origin = from == kNoNode;
  if (!origin) pkt.trace.push_back(id_);

  if (pkt.dst == id_) {
    log(LogKind::kDataRecv, pkt.src, pkt.dst, static_cast<int>(pkt.trace.size()) - 1);
    refresh(pkt.src);
    refresh(from);
    medium_.data_delivered(pkt);
    return;
  }
  if (!origin && attack_ && attack_->drops_data(now())) {
    attacks::blackhole_forward(*this, pkt);
    return;
  }
  if (static_cast<int>(pkt.trace.size()) > params_.ttl) {
    drop(pkt, DropReason::kTtl);
    return;
  }

  bool told_sender = false;
  if (auto route = active_route(pkt.dst)) {
    const NodeId nh = route->next_hop;
    if (medium_.unicast(id_, nh, pkt)) {
      if (!origin) {
        log(LogKind::kDataFwd, pkt.src, pkt.dst, static_cast<int>(pkt.trace.size()) - 1);
        routes_[pkt.dst].precursors.insert(from);
        refresh(pkt.src);
        refresh(from);
      }
      refresh(pkt.dst);
      refresh(nh);
      return;
    }
    told_sender = handle_link_break(nh).contains(from);
  }

  // A sinkhole keeps the traffic it attracted: it finds its own way on.
  const bool hold = origin || (attack_ && attack_->fabricates_routes(now()));
  if (hold) {
    initiate_discovery(pkt.dst);
    auto& d = pending_.at(pkt.dst);
    if (d.buffer.size() >= params_.buffer_limit) {
      drop(pkt, DropReason::kNoRoute);
    } else {
      d.buffer.push_back(std::move(pkt));
    }
    return;
  }
  drop(pkt, DropReason::kNoRoute);
  if (told_sender) return;  // the break's RERR already reached the sender
  std::int64_t seq = 0;
  if (auto it = routes_.find(pkt.dst); it != routes_.end()) seq = it->second.dest_seq;
  send_rerr({{pkt.dst, seq}}, {from}, false);
}

void AodvNode::release_buffer(NodeId dst) {
  auto it = pending_.find(dst);
  if (it == pending_.end()) return;
  std::deque<DataPacket> buffer = std::move(it->second.buffer);
  const int tag = it->second.tag;
  pending_.erase(it);
  for (auto& pkt : buffer) {
    // A relay flushing its own buffer keeps the tag of the origin's discovery.
    if (pkt.discovery_tag < 0) pkt.discovery_tag = tag;
    forward_data(kNoNode, std::move(pkt));
  }
}

void AodvNode::expire_routes() {
  for (auto& [dst, r] : routes_) {
    if (r.state == RouteState::kActive && r.expiry < now()) {
      r.state = RouteState::kInvalid;
      log(LogKind::kRouteInvalid, id_, dst, r.hop_count, r.dest_seq, "why=expired");
    }
  }
  std::erase_if(seen_rreqs_,
                [&](const auto& kv) { return now() - kv.second >= params_.rreq_memory; });
}

void AodvNode::housekeeping() {
  expire_routes();
  std::vector<NodeId> due;
  for (const auto& [dst, d] : pending_) {
    if (d.deadline <= now()) due.push_back(dst);
  }
  for (NodeId dst : due) {
    if (active_route(dst)) {
      release_buffer(dst);
      continue;
    }
    Discovery& d = pending_.at(dst);
    if (d.retries_left > 0) {
      --d.retries_left;
      d.deadline = now() + params_.discovery_timeout;
      originate_rreq(dst);
      continue;
    }
    std::deque<DataPacket> buffer = std::move(d.buffer);
    pending_.erase(dst);
    for (const auto& pkt : buffer) drop(pkt, DropReason::kNoRoute);
  }
}

void AodvNode::neighbors_changed(std::span<const NodeId> added, std::span<const NodeId> removed) {
  for (NodeId n : added) log(LogKind::kNbrAdd, n);
  for (NodeId n : removed) log(LogKind::kNbrDel, n);
}

}  // namespace fanetids
