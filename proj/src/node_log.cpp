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

#include "fanetids/node_log.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace fanetids {
namespace {

constexpr std::array<std::pair<LogKind, std::string_view>, 24> kKindNames{{
    {LogKind::kRreqSend, "RREQ_SEND"},       {LogKind::kRreqRecv, "RREQ_RECV"},
    {LogKind::kRreqDup, "RREQ_DUP"},         {LogKind::kRreqFwd, "RREQ_FWD"},
    {LogKind::kRrepSend, "RREP_SEND"},       {LogKind::kRrepRecv, "RREP_RECV"},
    {LogKind::kRrepFwd, "RREP_FWD"},         {LogKind::kRerrSend, "RERR_SEND"},
    {LogKind::kRerrRecv, "RERR_RECV"},       {LogKind::kRerrFwd, "RERR_FWD"},
    {LogKind::kDataOrig, "DATA_ORIG"},       {LogKind::kDataRecv, "DATA_RECV"},
    {LogKind::kDataFwd, "DATA_FWD"},         {LogKind::kDataDrop, "DATA_DROP"},
    {LogKind::kDiscovery, "DISCOVERY"},      {LogKind::kRouteAdd, "ROUTE_ADD"},
    {LogKind::kRouteUpdate, "ROUTE_UPDATE"}, {LogKind::kRouteInvalid, "ROUTE_INVALID"},
    {LogKind::kNbrAdd, "NBR_ADD"},           {LogKind::kNbrDel, "NBR_DEL"},
    {LogKind::kLinkBreak, "LINK_BREAK"},     {LogKind::kCtrlDrop, "CTRL_DROP"},
    {LogKind::kSnapshot, "SNAP"},            {LogKind::kBlackholeDrop, "BH_DROP"},
}};

template <typename T>
std::string int_field(T v) {
  return v < 0 ? std::string("-") : std::to_string(v);
}

template <typename T>
T parse_int_field(const std::string& tok) {
  if (tok == "-") return static_cast<T>(-1);
  T v{};
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) {
    throw std::invalid_argument("bad integer field '" + tok + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(LogKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<LogKind> parse_log_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string encode_snapshot(const Snapshot& s) {
  return "active=" + std::to_string(s.active_routes) + ";hops=" + format_exact(s.mean_hop_count) +
         ";nbrs=" + std::to_string(s.neighbor_count);
}

Snapshot decode_snapshot(std::string_view note) {
  Snapshot s;
  std::size_t pos = 0;
  int seen = 0;
  while (pos <= note.size()) {
    const auto end = std::min(note.find(';', pos), note.size());
    const auto item = note.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("bad snapshot note");
    const auto key = item.substr(0, eq);
    const auto val = item.substr(eq + 1);
    const char* b = val.data();
    const char* e = val.data() + val.size();
    std::from_chars_result r{};
    if (key == "active") {
      r = std::from_chars(b, e, s.active_routes);
    } else if (key == "hops") {
      r = std::from_chars(b, e, s.mean_hop_count);
    } else if (key == "nbrs") {
      r = std::from_chars(b, e, s.neighbor_count);
    } else {
      throw std::invalid_argument("bad snapshot key");
    }
    if (r.ec != std::errc{} || r.ptr != e) throw std::invalid_argument("bad snapshot value");
    ++seen;
    pos = end + 1;
  }
  if (seen != 3) throw std::invalid_argument("incomplete snapshot note");
  return s;
}

std::optional<std::int64_t> note_value(std::string_view note, std::string_view key) {
  std::size_t pos = 0;
  while (pos < note.size()) {
    const auto end = std::min(note.find(';', pos), note.size());
    const auto item = note.substr(pos, end - pos);
    if (item.size() > key.size() && item.substr(0, key.size()) == key && item[key.size()] == '=') {
      std::int64_t v = 0;
      const auto val = item.substr(key.size() + 1);
      auto r = std::from_chars(val.data(), val.data() + val.size(), v);
      if (r.ec == std::errc{} && r.ptr == val.data() + val.size()) return v;
      return std::nullopt;
    }
    pos = end + 1;
  }
  return std::nullopt;
}

std::string format_record(const LogRecord& r) {
  std::string line = format_time(r.time);
  line += ' ';
  line += to_string(r.kind);
  line += ' ' + int_field(r.origin);
  line += ' ' + int_field(r.dst);
  line += ' ' + int_field(r.hop_count);
  line += ' ' + int_field(r.dest_seq);
  line += ' ';
  line += r.note.empty() ? std::string("-") : r.note;
  return line;
}

LogRecord parse_record(const std::string& line) {
  std::istringstream in(line);
  std::string tok[7];
  for (auto& t : tok) {
    if (!(in >> t)) throw std::invalid_argument("expected 7 fields");
  }
  std::string extra;
  if (in >> extra) throw std::invalid_argument("trailing fields");
  LogRecord r;
  r.time = parse_time(tok[0]);
  const auto kind = parse_log_kind(tok[1]);
  if (!kind) throw std::invalid_argument("unknown kind '" + tok[1] + "'");
  r.kind = *kind;
  r.origin = parse_int_field<NodeId>(tok[2]);
  r.dst = parse_int_field<NodeId>(tok[3]);
  r.hop_count = parse_int_field<int>(tok[4]);
  r.dest_seq = parse_int_field<std::int64_t>(tok[5]);
  r.note = tok[6] == "-" ? std::string{} : tok[6];
  return r;
}

void write_log(std::ostream& out, const NodeLog& log) {
  for (const auto& r : log) out << format_record(r) << '\n';
  out << "END\n";
}

NodeLog read_log(std::istream& in, const std::string& source) {
  NodeLog log;
  std::string line;
  std::size_t line_no = 0;
  bool ended = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (ended) throw std::runtime_error(source + ":" + std::to_string(line_no) + ": data after END");
    if (line == "END") {
      ended = true;
      continue;
    }
    try {
      log.push_back(parse_record(line));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!ended) throw std::runtime_error(source + ": truncated log (no END line)");
  return log;
}

}  // namespace fanetids
