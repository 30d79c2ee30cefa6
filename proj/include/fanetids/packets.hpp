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

#ifndef FANETIDS_PACKETS_HPP_
#define FANETIDS_PACKETS_HPP_

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "fanetids/common.hpp"

namespace fanetids {

enum class ControlKind { kRreq, kRrep, kRerr };

// Wire sizes in bytes.
constexpr int kRreqBytes = 24;
constexpr int kRrepBytes = 20;
constexpr int rerr_bytes(int destinations) { return 4 + 8 * destinations; }

struct ControlPacket {
  ControlKind kind = ControlKind::kRreq;
  NodeId origin = kNoNode;       // RREQ originator (for RREP: who asked)
  NodeId destination = kNoNode;  // node the route leads to
  int rreq_id = 0;
  std::int64_t origin_seq = 0;
  std::int64_t dest_seq = 0;
  int hop_count = 0;
  // RERR only: (destination, incremented sequence number).
  std::vector<std::pair<NodeId, std::int64_t>> unreachable;
};

struct DataPacket {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  int seq = 0;
  int size = 0;
  SimTime created = 0;
  std::vector<NodeId> trace;  // nodes visited so far, src first
  int discovery_tag = -1;     // set on the packets flushed by a discovery
};

using Packet = std::variant<ControlPacket, DataPacket>;

}  // namespace fanetids

#endif  // FANETIDS_PACKETS_HPP_
