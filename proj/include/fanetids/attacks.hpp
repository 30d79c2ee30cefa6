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

#ifndef FANETIDS_ATTACKS_HPP_
#define FANETIDS_ATTACKS_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fanetids/common.hpp"
#include "fanetids/packets.hpp"
#include "fanetids/scenario_config.hpp"

namespace fanetids {

class AodvNode;

struct AttackProfile {
  AttackType kind = AttackType::kSinkhole;
  std::int64_t seq_inflation = 100;
  int flood_burst = 10;
  double flood_period = 3.0;  // s
  SimTime active_from = 0;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
  bool active(SimTime now) const { return now >= active_from; }
  bool fabricates_routes(SimTime now) const {
    return active(now) && (kind == AttackType::kSinkhole || kind == AttackType::kBlackhole);
  }
  bool drops_data(SimTime now) const { return active(now) && kind == AttackType::kBlackhole; }
  bool floods(SimTime now) const { return active(now) && kind == AttackType::kFlooding; }
};

namespace attacks {

// Answers an RREQ with a forged RREP that claims a one-hop route with an
// inflated destination sequence number. The RREQ is not rebroadcast.
ControlPacket sinkhole_on_rreq(AodvNode& attacker, NodeId from, const ControlPacket& rreq);

// Silently discards a data packet. Only the attacker-private log sees it.
void blackhole_forward(AodvNode& attacker, const DataPacket& pkt);

// One flooding burst: `flood_burst` RREQs toward a single random destination
// drawn from [0, node_universe) minus the attacker itself, each with a fresh
// rreq_id. Returns the chosen destination.
NodeId flooding_tick(AodvNode& attacker, Rng& rng, int node_universe);

}  // namespace attacks

// Ground-truth file: one "node_id kind active_from" line per attacker.
struct GroundTruthEntry {
  NodeId node = kNoNode;
  AttackType kind = AttackType::kNone;
  SimTime active_from = 0;
  bool operator==(const GroundTruthEntry&) const = default;
};
void write_ground_truth(std::ostream& out, const std::vector<GroundTruthEntry>& entries);
std::vector<GroundTruthEntry> read_ground_truth(std::istream& in);

}  // namespace fanetids

#endif  // FANETIDS_ATTACKS_HPP_
