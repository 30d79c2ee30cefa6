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

#include "fanetids/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fanetids/packets.hpp"

namespace fanetids {

const std::array<std::string_view, kFeatureCount> kFeatureNames{
    "rreq_sent",
    "rreq_received",
    "rreq_forwarded",
    "duplicate_rreq_received",
    "rrep_sent",
    "rrep_received",
    "rrep_forwarded",
    "rerr_sent",
    "rerr_received",
    "rerr_forwarded",
    "data_originated",
    "data_received_as_dst",
    "data_forwarded",
    "data_dropped_no_route",
    "discovery_initiated",
    "routes_added",
    "routes_invalidated",
    "routes_updated",
    "active_routes",
    "mean_hop_count_active",
    "max_dest_seq_seen",
    "mean_rrep_seq_delta",
    "neighbor_count",
    "neighbors_added",
    "neighbors_removed",
    "link_breaks_detected",
    "control_pkts_received_total",
    "control_bytes_received_total",
    "distinct_rreq_origins",
    "rreq_rate_per_neighbor",
    "delivery_ratio_local",
};

namespace {

enum F : int {
  kRreqSent, kRreqReceived, kRreqForwarded, kRreqDuplicate, kRrepSent, kRrepReceived,
  kRrepForwarded, kRerrSent, kRerrReceived, kRerrForwarded, kDataOriginated, kDataReceived,
  kDataForwarded, kDataDropped, kDiscoveries, kRoutesAdded, kRoutesInvalidated, kRoutesUpdated,
  kActiveRoutes, kMeanHops, kMaxDestSeq, kMeanRrepDelta, kNeighborCount, kNeighborsAdded,
  kNeighborsRemoved, kLinkBreaks, kCtrlPackets, kCtrlBytes, kRreqOrigins, kRreqPerNeighbor,
  kDeliveryRatio,
};
static_assert(kDeliveryRatio + 1 == kFeatureCount);

constexpr int kColumns = 3 + kFeatureCount + 1;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string header() {
  std::string h = "scenario_id,node_id,window_start";
  char buf[8];
  for (int i = 1; i <= kFeatureCount; ++i) {
    std::snprintf(buf, sizeof buf, ",f%02d", i);
    h += buf;
  }
  return h + ",label";
}

}  // namespace

FeatureVector extract_window(std::span<const LogRecord> records, const Snapshot& snapshot) {
  FeatureVector f = FeatureVector::Zero();
  std::set<NodeId> origins;
  double delta_sum = 0.0;
  int deltas = 0;
  std::int64_t max_seq = 0;
  for (const auto& r : records) {
    switch (r.kind) {
      case LogKind::kRreqSend: f[kRreqSent] += 1; break;
      case LogKind::kRreqRecv:
      case LogKind::kRreqDup:
        f[kRreqReceived] += 1;
        if (r.kind == LogKind::kRreqDup) f[kRreqDuplicate] += 1;
        f[kCtrlBytes] += kRreqBytes;
        origins.insert(r.origin);
        max_seq = std::max(max_seq, r.dest_seq);
        break;
      case LogKind::kRreqFwd: f[kRreqForwarded] += 1; break;
      case LogKind::kRrepSend: f[kRrepSent] += 1; break;
      case LogKind::kRrepRecv:
        f[kRrepReceived] += 1;
        f[kCtrlBytes] += kRrepBytes;
        max_seq = std::max(max_seq, r.dest_seq);
        if (auto d = note_value(r.note, "delta")) {
          delta_sum += static_cast<double>(*d);
          ++deltas;
        }
        break;
      case LogKind::kRrepFwd: f[kRrepForwarded] += 1; break;
      case LogKind::kRerrSend: f[kRerrSent] += 1; break;
      case LogKind::kRerrRecv:
        f[kRerrReceived] += 1;
        f[kCtrlBytes] += rerr_bytes(static_cast<int>(note_value(r.note, "n").value_or(1)));
        break;
      case LogKind::kRerrFwd: f[kRerrForwarded] += 1; break;
      case LogKind::kDataOrig: f[kDataOriginated] += 1; break;
      case LogKind::kDataRecv: f[kDataReceived] += 1; break;
      case LogKind::kDataFwd: f[kDataForwarded] += 1; break;
      case LogKind::kDataDrop: f[kDataDropped] += 1; break;
      case LogKind::kDiscovery: f[kDiscoveries] += 1; break;
      case LogKind::kRouteAdd: f[kRoutesAdded] += 1; break;
      case LogKind::kRouteUpdate: f[kRoutesUpdated] += 1; break;
      case LogKind::kRouteInvalid: f[kRoutesInvalidated] += 1; break;
      case LogKind::kNbrAdd: f[kNeighborsAdded] += 1; break;
      case LogKind::kNbrDel: f[kNeighborsRemoved] += 1; break;
      case LogKind::kLinkBreak: f[kLinkBreaks] += 1; break;
      case LogKind::kCtrlDrop:
      case LogKind::kSnapshot:
      case LogKind::kBlackholeDrop: break;
    }
  }
  f[kActiveRoutes] = snapshot.active_routes;
  f[kMeanHops] = snapshot.mean_hop_count;
  f[kNeighborCount] = snapshot.neighbor_count;
  f[kMaxDestSeq] = static_cast<double>(max_seq);
  f[kMeanRrepDelta] = deltas == 0 ? 0.0 : delta_sum / deltas;
  f[kCtrlPackets] = f[kRreqReceived] + f[kRrepReceived] + f[kRerrReceived];
  f[kRreqOrigins] = static_cast<double>(origins.size());
  f[kRreqPerNeighbor] = f[kRreqReceived] / std::max(1, snapshot.neighbor_count);
  // Share of the data packets this node handled that it did not drop.
  const double handled = f[kDataOriginated] + f[kDataForwarded] + f[kDataReceived] + f[kDataDropped];
  f[kDeliveryRatio] = handled == 0.0 ? 0.0 : (handled - f[kDataDropped]) / handled;
  return f;
}

std::vector<FeatureWindow> extract_node(const NodeLog& log, NodeId node,
                                        const std::string& scenario_id, SimTime warmup,
                                        SimTime window_len) {
  std::vector<FeatureWindow> out;
  std::size_t begin = 0;  // first record not yet assigned to a window
  for (std::size_t i = 0; i < log.size(); ++i) {
    const LogRecord& snap = log[i];
    if (snap.kind != LogKind::kSnapshot) continue;
    const SimTime start = snap.time - window_len;
    if (start < warmup) continue;
    std::vector<LogRecord> slice;
    while (begin < log.size() && log[begin].time < snap.time) {
      if (log[begin].time >= start && log[begin].kind != LogKind::kSnapshot) {
        slice.push_back(log[begin]);
      }
      ++begin;
    }
    FeatureWindow w;
    w.scenario_id = scenario_id;
    w.node_id = node;
    w.window_start = start;
    w.features = extract_window(slice, decode_snapshot(snap.note));
    out.push_back(std::move(w));
  }
  return out;
}

Label label_window(const FeatureWindow& window, const ScenarioMeta& meta) {
  const bool attack = meta.has_attackers && meta.attack_type != AttackType::kNone &&
                      meta.active_from && window.window_start >= *meta.active_from;
  return attack ? Label::kAttack : Label::kNormal;
}

std::vector<FeatureWindow> build_dataset(std::span<const NodeLog> logs, const ScenarioConfig& cfg,
                                         const std::string& scenario_id) {
  ScenarioMeta meta;
  meta.attack_type = cfg.attack_type;
  meta.active_from = cfg.active_from();
  meta.has_attackers = meta.active_from.has_value();
  std::vector<FeatureWindow> out;
  for (std::size_t id = 0; id < logs.size(); ++id) {
    auto windows = extract_node(logs[id], static_cast<NodeId>(id), scenario_id,
                                from_seconds(cfg.warmup), from_seconds(cfg.window_len));
    for (auto& w : windows) {
      w.label = label_window(w, meta);
      out.push_back(std::move(w));
    }
  }
  return out;
}

std::vector<FeatureWindow> extract_scenario_dir(const std::filesystem::path& dir,
                                                const std::string& scenario_id) {
  const ScenarioConfig cfg = load_config((dir / "scenario.cfg").string());
  std::vector<NodeLog> logs;
  for (NodeId id = 0; id < cfg.total_nodes(); ++id) {
    const auto path = dir / ("node_" + std::to_string(id) + ".log");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing log " + path.string());
    logs.push_back(read_log(in, path.string()));
  }
  return build_dataset(logs, cfg, scenario_id);
}

ScalerParams fit_scaler(std::span<const FeatureWindow> train) {
  if (train.empty()) throw std::invalid_argument("fit_scaler on an empty set");
  ScalerParams p;
  p.mean.setZero();
  for (const auto& w : train) p.mean += w.features;
  p.mean /= static_cast<double>(train.size());
  FeatureVector var = FeatureVector::Zero();
  for (const auto& w : train) var += (w.features - p.mean).array().square().matrix();
  p.std = (var / static_cast<double>(train.size())).cwiseSqrt();
  return p;
}

FeatureWindow apply_scaler(const ScalerParams& params, FeatureWindow window) {
  window.features = ((window.features - params.mean).array() /
                     params.std.array().max(kScalerEpsilon))
                        .matrix();
  return window;
}

void apply_scaler(const ScalerParams& params, std::vector<FeatureWindow>& windows) {
  for (auto& w : windows) w = apply_scaler(params, std::move(w));
}

Split split(std::span<const FeatureWindow> windows, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  }
  std::map<NodeId, std::vector<std::size_t>> groups;
  if (spec.stratify) {
    for (std::size_t i = 0; i < windows.size(); ++i) groups[windows[i].node_id].push_back(i);
  } else {
    auto& all = groups[kNoNode];
    for (std::size_t i = 0; i < windows.size(); ++i) all.push_back(i);
  }

  Split out;
  std::vector<char> to_train(windows.size(), 0);
  for (auto& [node, idx] : groups) {
    if (idx.size() < 5) {
      for (auto i : idx) to_train[i] = 1;
      if (spec.stratify) out.undersized_nodes.push_back(node);
      std::cerr << "warning: node " << node << " has " << idx.size()
                << " windows; all go to training\n";
      continue;
    }
    Rng rng(derive_seed(spec.seed, Stream::kSplit, node));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::lround(spec.train_fraction * idx.size()));
    for (std::size_t k = 0; k < n_train; ++k) to_train[idx[k]] = 1;
  }
  for (std::size_t i = 0; i < windows.size(); ++i) {
    (to_train[i] ? out.train : out.test).push_back(windows[i]);
  }
  return out;
}

void write_dataset(std::ostream& out, std::span<const FeatureWindow> windows) {
  out << header() << '\n';
  char buf[32];
  for (const auto& w : windows) {
    if (w.scenario_id.find_first_of(",\n") != std::string::npos) {
      throw std::invalid_argument("scenario id contains a separator: " + w.scenario_id);
    }
    out << w.scenario_id << ',' << w.node_id << ',' << format_time(w.window_start);
    for (int i = 0; i < kFeatureCount; ++i) {
      std::snprintf(buf, sizeof buf, "%.6g", w.features[i]);
      out << ',' << buf;
    }
    out << ',' << static_cast<int>(w.label) << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, std::span<const FeatureWindow> windows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_dataset(out, windows);
}

std::vector<FeatureWindow> read_dataset(std::istream& in) {
  std::vector<FeatureWindow> out;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != header()) {
    throw std::runtime_error("line 1: missing or wrong dataset header");
  }
  auto fail = [&](const std::string& what) {
    return std::runtime_error("line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (static_cast<int>(cols.size()) != kColumns) {
      throw fail("expected " + std::to_string(kColumns) + " columns, got " +
                 std::to_string(cols.size()));
    }
    FeatureWindow w;
    w.scenario_id = cols[0];
    auto r = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), w.node_id);
    if (r.ec != std::errc{} || r.ptr != cols[1].data() + cols[1].size()) throw fail("bad node_id");
    try {
      w.window_start = parse_time(cols[2]);
    } catch (const std::invalid_argument&) {
      throw fail("bad window_start");
    }
    for (int i = 0; i < kFeatureCount; ++i) {
      const auto& c = cols[3 + i];
      double v = 0.0;
      auto rr = std::from_chars(c.data(), c.data() + c.size(), v);
      if (c.empty() || rr.ec != std::errc{} || rr.ptr != c.data() + c.size()) {
        throw fail("feature f" + std::to_string(i + 1) + " is not numeric: '" + c + "'");
      }
      w.features[i] = v;
    }
    const auto& lab = cols.back();
    if (lab == "0") {
      w.label = Label::kNormal;
    } else if (lab == "1") {
      w.label = Label::kAttack;
    } else {
      throw fail("label must be 0 or 1");
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<FeatureWindow> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_dataset(in);
}

}  // namespace fanetids
