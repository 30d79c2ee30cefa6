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

#include "fanetids/sim.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numbers>
#include <stdexcept>

namespace fanetids {
namespace {

std::string_view kind_name(EventKind k) {
  switch (k) {
    case EventKind::kWindowClose: return "WINDOW";
    case EventKind::kMobilityTick: return "MOBILITY";
    case EventKind::kAttackTick: return "ATTACK";
    case EventKind::kAppSend: return "APP";
    case EventKind::kPacketArrival: return "ARRIVAL";
  }
  return "?";
}

std::string packet_name(const Packet& p) {
  if (const auto* c = std::get_if<ControlPacket>(&p)) {
    switch (c->kind) {
      case ControlKind::kRreq: return "RREQ";
      case ControlKind::kRrep: return "RREP";
      case ControlKind::kRerr: return "RERR";
    }
  }
  return "DATA";
}

bool has_repeat(std::vector<NodeId> trace) {
  std::sort(trace.begin(), trace.end());
  return std::adjacent_find(trace.begin(), trace.end()) != trace.end();
}

// Marks the discovery that released `pkt` when the packet met an attacker.
void note_attacker_path(const DataPacket& pkt, const std::set<NodeId>& attackers,
                        std::vector<bool>& through, NetworkStats& stats) {
  if (pkt.discovery_tag < 0 || through[pkt.discovery_tag]) return;
  for (NodeId n : pkt.trace) {
    if (n != pkt.src && attackers.contains(n)) {
      through[pkt.discovery_tag] = true;
      ++stats.discoveries_through_attacker;
      return;
    }
  }
}

}  // namespace

bool EventLater::operator()(const SimEvent& a, const SimEvent& b) const {
  if (a.time != b.time) return a.time > b.time;
  if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
  if (a.node != b.node) return a.node > b.node;
  return a.seq > b.seq;
}

void EventQueue::push(SimEvent ev) {
  ev.seq = next_seq_++;
  heap_.push(std::move(ev));
}

SimEvent EventQueue::pop() {
  SimEvent ev = heap_.top();
  heap_.pop();
  return ev;
}

Network::Network(NetworkOptions options, std::vector<NodeState> initial)
    : opt_(std::move(options)),
      nodes_(std::move(initial)),
      adjacency_(nodes_.size()),
      logs_(nodes_.size()),
      flood_rng_(derive_seed(opt_.cfg.seed, Stream::kFlooding)),
      run_end_(opt_.cfg.run_end()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != static_cast<NodeId>(i)) throw std::invalid_argument("node ids out of order");
    mobility_rngs_.emplace_back(derive_seed(opt_.cfg.seed, Stream::kMobility, i));
    agents_.push_back(
        std::make_unique<AodvNode>(static_cast<NodeId>(i), *this, logs_[i], opt_.aodv));
  }
  active_from_ = opt_.cfg.active_from();
  recompute_adjacency(true);

  queue_.push(SimEvent{from_seconds(kMobilityTickSeconds), EventKind::kMobilityTick, kNoNode, 0, {}});
  if (opt_.collect_windows) {
    const SimTime first = from_seconds(opt_.cfg.warmup + opt_.cfg.window_len);
    if (first <= run_end_) queue_.push(SimEvent{first, EventKind::kWindowClose, kNoNode, 0, {}});
  }
}

bool Network::adjacent(NodeId a, NodeId b) const {
  if (a < 0 || b < 0 || a >= size() || b >= size()) return false;
  const auto& adj = adjacency_[a];
  return std::binary_search(adj.begin(), adj.end(), b);
}

std::span<const NodeId> Network::neighbors_of(NodeId n) const { return adjacency_.at(n); }

PhaseStats& Network::phase_stats(SimTime t) {
  const auto split = opt_.stats_split ? opt_.stats_split : active_from_;
  return split && t >= *split ? stats_.active : stats_.dormant;
}

void Network::broadcast(NodeId from, const ControlPacket& pkt) {
  if (pkt.kind == ControlKind::kRreq) {
    auto& ps = phase_stats(now_);
    ++ps.rreq_transmissions;
    if (pkt.hop_count == 0) ++ps.rreq_originated;
  }
  for (NodeId n : adjacency_[from]) {
    queue_.push(SimEvent{now_ + kHopLatency, EventKind::kPacketArrival, n, 0, Arrival{from, pkt}});
  }
}

bool Network::unicast(NodeId from, NodeId to, Packet pkt) {
  if (!adjacent(from, to)) return false;
  queue_.push(
      SimEvent{now_ + kHopLatency, EventKind::kPacketArrival, to, 0, Arrival{from, std::move(pkt)}});
  return true;
}

void Network::data_delivered(const DataPacket& pkt) {
  ++phase_stats(pkt.created).data_delivered;
  stats_.delivered_latency_us += now_ - pkt.created;
  if (has_repeat(pkt.trace)) ++stats_.looped_deliveries;
  delivered_traces_.push_back(pkt.trace);
  note_attacker_path(pkt, attackers_, tag_through_attacker_, stats_);
}

void Network::data_dropped(NodeId at, const DataPacket& pkt, DropReason why) {
  (void)at, (void)why;
  note_attacker_path(pkt, attackers_, tag_through_attacker_, stats_);
}

int Network::discovery_started(NodeId origin, NodeId dst) {
  (void)dst;
  if (!active_from_ || now_ < *active_from_ || attackers_.contains(origin)) return -1;
  const auto& adj = adjacency_[origin];
  const bool near = std::any_of(adj.begin(), adj.end(),
                                [&](NodeId n) { return attackers_.contains(n); });
  if (!near) return -1;
  ++stats_.discoveries_near_attacker;
  tag_through_attacker_.push_back(false);
  return static_cast<int>(tag_through_attacker_.size()) - 1;
}

void Network::set_attacker(NodeId node, const AttackProfile& profile) {
  agents_.at(node)->set_attack(profile);
  attackers_.insert(node);
  nodes_[node].role = Role::kAttacker;
  active_from_ = active_from_ ? std::min(*active_from_, profile.active_from) : profile.active_from;
  if (profile.kind == AttackType::kFlooding && profile.active_from < run_end_) {
    queue_.push(SimEvent{profile.active_from, EventKind::kAttackTick, node, 0, {}});
  }
}

void Network::schedule_send(SimTime at, NodeId src, NodeId dst) {
  queue_.push(SimEvent{at, EventKind::kAppSend, src, 0, AppSend{src, dst, false}});
}

void Network::schedule_flow(SimTime first, NodeId src, NodeId dst) {
  if (first < run_end_) {
    queue_.push(SimEvent{first, EventKind::kAppSend, src, 0, AppSend{src, dst, true}});
  }
}

void Network::schedule_move(SimTime at, NodeId node, const Eigen::Vector3d& position) {
  queue_.push(SimEvent{at, EventKind::kMobilityTick, node, 0, MoveTo{node, position}});
}

void Network::run_until(SimTime until) {
  while (!queue_.empty() && queue_.next_time() <= until) {
    SimEvent ev = queue_.pop();
    now_ = ev.time;
    if (opt_.record_trace) trace_event(ev);
    dispatch(ev);
  }
  now_ = std::max(now_, until);
}

void Network::trace_event(const SimEvent& ev) {
  std::string line = format_time(ev.time);
  line += ' ';
  line += kind_name(ev.kind);
  line += ' ' + std::to_string(ev.node);
  if (const auto* a = std::get_if<Arrival>(&ev.payload)) {
    line += ' ' + packet_name(a->packet) + " from=" + std::to_string(a->from);
  }
  trace_.push_back(std::move(line));
}

void Network::dispatch(const SimEvent& ev) {
  switch (ev.kind) {
    case EventKind::kWindowClose: close_window(); break;
    case EventKind::kMobilityTick:
      if (const auto* m = std::get_if<MoveTo>(&ev.payload)) {
        nodes_[m->node].position = m->position;
        recompute_adjacency(true);
      } else {
        mobility_tick(ev.time);
      }
      break;
    case EventKind::kAttackTick: attack_tick(ev.node); break;
    case EventKind::kAppSend: app_send(ev); break;
    case EventKind::kPacketArrival: arrival(ev.node, std::get<Arrival>(ev.payload)); break;
  }
}

void Network::mobility_tick(SimTime t) {
  if (opt_.mobility) {
    for (auto& s : nodes_) {
      if (s.role == Role::kGbs) continue;
      s = gm_step(s, opt_.cfg, mobility_rngs_[s.id]);
    }
  }
  recompute_adjacency(true);
  for (auto& a : agents_) a->housekeeping();
  const SimTime next = t + from_seconds(kMobilityTickSeconds);
  if (next <= run_end_) queue_.push(SimEvent{next, EventKind::kMobilityTick, kNoNode, 0, {}});
}

void Network::recompute_adjacency(bool log_changes) {
  Adjacency fresh = neighbors(nodes_, opt_.cfg.tx_range);
  if (log_changes) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      std::vector<NodeId> added, removed;
      std::set_difference(fresh[i].begin(), fresh[i].end(), adjacency_[i].begin(),
                          adjacency_[i].end(), std::back_inserter(added));
      std::set_difference(adjacency_[i].begin(), adjacency_[i].end(), fresh[i].begin(),
                          fresh[i].end(), std::back_inserter(removed));
      if (!added.empty() || !removed.empty()) agents_[i]->neighbors_changed(added, removed);
    }
  }
  adjacency_ = std::move(fresh);
}

void Network::close_window() {
  for (auto& a : agents_) a->log_snapshot();
  window_closes_ += size();
  const SimTime next = now_ + from_seconds(opt_.cfg.window_len);
  if (next <= run_end_) queue_.push(SimEvent{next, EventKind::kWindowClose, kNoNode, 0, {}});
}

void Network::attack_tick(NodeId attacker) {
  AodvNode& agent = *agents_[attacker];
  if (!agent.attack() || !agent.attack()->floods(now_)) return;
  attacks::flooding_tick(agent, flood_rng_, size());
  phase_stats(now_).attack_rreqs += agent.attack()->flood_burst;
  const SimTime next = now_ + from_seconds(agent.attack()->flood_period);
  if (next < run_end_) queue_.push(SimEvent{next, EventKind::kAttackTick, attacker, 0, {}});
}

void Network::app_send(const SimEvent& ev) {
  const auto& s = std::get<AppSend>(ev.payload);
  int& seq = next_seq_[{s.src, s.dst}];
  ++phase_stats(now_).data_sent;
  agents_[s.src]->send_data(s.dst, opt_.cfg.packet_size, seq++);
  if (s.periodic) {
    const SimTime next = now_ + from_seconds(1.0 / opt_.cfg.packet_rate);
    if (next < run_end_) queue_.push(SimEvent{next, EventKind::kAppSend, s.src, 0, s});
  }
}

void Network::arrival(NodeId to, const Arrival& a) { agents_[to]->receive(a.from, a.packet); }

std::vector<GroundTruthEntry> ScenarioResult::ground_truth() const {
  std::vector<GroundTruthEntry> out;
  for (NodeId a : attackers) out.push_back({a, cfg.attack_type, active_from.value_or(0)});
  return out;
}

std::vector<NodeState> initial_states(const ScenarioConfig& cfg) {
  std::vector<NodeState> out;
  for (NodeId id = 0; id < cfg.total_nodes(); ++id) {
    NodeState s;
    s.id = id;
    if (id == cfg.gbs_id()) {
      s.position = cfg.area / 2.0;
      s.role = Role::kGbs;
    } else {
      Rng rng(derive_seed(cfg.seed, Stream::kMobility, id, Stream::kInit));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int k = 0; k < 3; ++k) s.position[k] = unit(rng) * cfg.area[k];
      s.speed = cfg.mean_speed;
      s.direction = (2.0 * unit(rng) - 1.0) * std::numbers::pi;
      s.mean_direction = s.direction;
    }
    out.push_back(s);
  }
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, bool record_trace,
                            std::optional<SimTime> stats_split) {
  validate(cfg);
  ScenarioResult r;
  r.cfg = cfg;
  r.active_from = cfg.active_from();
  r.end = cfg.run_end();

  std::vector<NodeState> states = initial_states(cfg);
  std::vector<NodeId> mobile(cfg.node_count);
  for (NodeId i = 0; i < cfg.node_count; ++i) mobile[i] = i;
  Rng traffic(derive_seed(cfg.seed, Stream::kTraffic));
  std::shuffle(mobile.begin(), mobile.end(), traffic);
  r.sources.assign(mobile.begin(), mobile.begin() + cfg.traffic_pairs);
  r.destinations.assign(mobile.begin() + cfg.traffic_pairs,
                        mobile.begin() + 2 * cfg.traffic_pairs);
  std::vector<NodeId> relays(mobile.begin() + 2 * cfg.traffic_pairs, mobile.end());
  std::sort(relays.begin(), relays.end());
  if (r.active_from) {
    Rng pick(derive_seed(cfg.seed, Stream::kAttackers));
    std::shuffle(relays.begin(), relays.end(), pick);
    r.attackers.assign(relays.begin(), relays.begin() + cfg.attacker_count());
    std::sort(r.attackers.begin(), r.attackers.end());
  }
  for (NodeId s : r.sources) states[s].role = Role::kSource;
  for (NodeId d : r.destinations) states[d].role = Role::kDestination;

  NetworkOptions opt;
  opt.cfg = cfg;
  opt.record_trace = record_trace;
  opt.stats_split = stats_split;
  Network net(opt, std::move(states));
  for (NodeId a : r.attackers) {
    AttackProfile p;
    p.kind = cfg.attack_type;
    p.active_from = *r.active_from;
    net.set_attacker(a, p);
  }
  Rng phase(derive_seed(cfg.seed, Stream::kAppPhase));
  std::uniform_real_distribution<double> offset(0.0, 1.0 / cfg.packet_rate);
  for (int i = 0; i < cfg.traffic_pairs; ++i) {
    net.schedule_flow(from_seconds(offset(phase)), r.sources[i], r.destinations[i]);
  }
  net.run_until(r.end);

  for (NodeId a : r.attackers) r.attacker_logs[a] = net.node(a).private_log();
  r.trace = net.trace();
  r.stats = net.stats();
  r.window_closes = net.window_closes();
  r.node_logs = net.take_logs();
  return r;
}

void write_scenario(const ScenarioResult& result, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  for (std::size_t id = 0; id < result.node_logs.size(); ++id) {
    auto out = open("node_" + std::to_string(id) + ".log");
    write_log(out, result.node_logs[id]);
  }
  for (const auto& [id, log] : result.attacker_logs) {
    auto out = open("attacker_" + std::to_string(id) + ".log");
    write_log(out, log);
  }
  {
    auto out = open("ground_truth.txt");
    write_ground_truth(out, result.ground_truth());
  }
  {
    auto out = open("scenario.cfg");
    out << to_config_text(result.cfg);
  }
  {
    auto out = open("summary.txt");
    auto list = [&](const char* key, const std::vector<NodeId>& ids) {
      out << key << '=';
      for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << ids[i];
      out << '\n';
    };
    list("sources", result.sources);
    list("destinations", result.destinations);
    list("attackers", result.attackers);
    const auto& s = result.stats;
    for (const auto& [name, p] : {std::pair{"dormant", s.dormant}, std::pair{"active", s.active}}) {
      out << name << ".data_sent=" << p.data_sent << '\n'
          << name << ".data_delivered=" << p.data_delivered << '\n'
          << name << ".rreq_transmissions=" << p.rreq_transmissions << '\n'
          << name << ".attack_rreqs=" << p.attack_rreqs << '\n';
    }
    out << "window_closes=" << result.window_closes << '\n';
  }
  if (!result.trace.empty()) {
    auto out = open("trace.log");
    for (const auto& line : result.trace) out << line << '\n';
  }
}

}  // namespace fanetids
