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

// Per-node event log. One record per protocol event a node can observe
// about itself; the dataset extractor consumes nothing else.
//
// Text form, one record per line:
//
//   time kind origin dst hop_count dest_seq note
//
// Absent integer fields print as "-", an absent note as "-". A log file
// ends with a single "END" line; a file without it is truncated.

#ifndef FANETIDS_NODE_LOG_HPP_
#define FANETIDS_NODE_LOG_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fanetids/common.hpp"

namespace fanetids {

enum class LogKind {
  kRreqSend,
  kRreqRecv,
  kRreqDup,
  kRreqFwd,
  kRrepSend,
  kRrepRecv,
  kRrepFwd,
  kRerrSend,
  kRerrRecv,
  kRerrFwd,
  kDataOrig,
  kDataRecv,
  kDataFwd,
  kDataDrop,
  kDiscovery,
  kRouteAdd,
  kRouteUpdate,
  kRouteInvalid,
  kNbrAdd,
  kNbrDel,
  kLinkBreak,
  kCtrlDrop,
  kSnapshot,
  // Attacker-private records. Never written to a node log.
  kBlackholeDrop,
};

std::string_view to_string(LogKind kind);
std::optional<LogKind> parse_log_kind(std::string_view text);

struct LogRecord {
  SimTime time = 0;
  LogKind kind = LogKind::kSnapshot;
  NodeId origin = kNoNode;
  NodeId dst = kNoNode;
  int hop_count = -1;
  std::int64_t dest_seq = -1;
  std::string note;

  bool operator==(const LogRecord&) const = default;
};

using NodeLog = std::vector<LogRecord>;

// Routing/neighbor state captured when a collection window closes.
struct Snapshot {
  int active_routes = 0;
  double mean_hop_count = 0.0;
  int neighbor_count = 0;
};
std::string encode_snapshot(const Snapshot& s);
Snapshot decode_snapshot(std::string_view note);

// Integer value of "key=<int>" inside a note, if present.
std::optional<std::int64_t> note_value(std::string_view note, std::string_view key);

std::string format_record(const LogRecord& r);
// Throws std::invalid_argument on a malformed line.
LogRecord parse_record(const std::string& line);

void write_log(std::ostream& out, const NodeLog& log);
// Throws std::runtime_error naming `source` and the line number on malformed
// or truncated input.
NodeLog read_log(std::istream& in, const std::string& source);

}  // namespace fanetids

#endif  // FANETIDS_NODE_LOG_HPP_
