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

#include "fanetids/attacks.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fanetids/aodv.hpp"

namespace fanetids {

void AttackProfile::validate() const {
  if (kind == AttackType::kNone) throw std::invalid_argument("attack profile without a kind");
  if (seq_inflation < 1) throw std::invalid_argument("seq_inflation must be >= 1");
  if (flood_burst < 1) throw std::invalid_argument("flood_burst must be >= 1");
  if (!(flood_period > 0.0)) throw std::invalid_argument("flood_period must be positive");
}

namespace attacks {

ControlPacket sinkhole_on_rreq(AodvNode& attacker, NodeId from, const ControlPacket& rreq) {
  ControlPacket rrep;
  rrep.kind = ControlKind::kRrep;
  rrep.origin = rreq.origin;
  rrep.destination = rreq.destination;
  rrep.dest_seq = rreq.dest_seq + attacker.attack()->seq_inflation;
  rrep.hop_count = 1;
  attacker.send_rrep(from, rrep);
  return rrep;
}

void blackhole_forward(AodvNode& attacker, const DataPacket& pkt) {
  attacker.log(LogKind::kBlackholeDrop, pkt.src, pkt.dst,
               static_cast<int>(pkt.trace.size()) - 1);
  attacker.medium().data_dropped(attacker.id(), pkt, DropReason::kBlackhole);
}

NodeId flooding_tick(AodvNode& attacker, Rng& rng, int node_universe) {
  if (node_universe < 2) throw std::invalid_argument("flooding needs another node");
  std::uniform_int_distribution<int> pick(0, node_universe - 2);
  NodeId dst = pick(rng);
  if (dst >= attacker.id()) ++dst;
  for (int i = 0; i < attacker.attack()->flood_burst; ++i) attacker.originate_rreq(dst);
  return dst;
}

}  // namespace attacks

void write_ground_truth(std::ostream& out, const std::vector<GroundTruthEntry>& entries) {
  for (const auto& e : entries) {
    out << e.node << ' ' << to_string(e.kind) << ' ' << format_time(e.active_from) << '\n';
  }
}

std::vector<GroundTruthEntry> read_ground_truth(std::istream& in) {
  std::vector<GroundTruthEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    GroundTruthEntry e;
    std::string kind, at;
    if (!(ss >> e.node >> kind >> at)) {
      throw std::runtime_error("ground truth line " + std::to_string(line_no) + ": malformed");
    }
    auto k = parse_attack_type(kind);
    if (!k) throw std::runtime_error("ground truth line " + std::to_string(line_no) + ": bad kind");
    e.kind = *k;
    e.active_from = parse_time(at);
    out.push_back(e);
  }
  return out;
}

}  // namespace fanetids
