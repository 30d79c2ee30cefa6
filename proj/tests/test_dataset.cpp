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


#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "fanetids/attacks.hpp"
#include "fanetids/dataset.hpp"
#include "fanetids/sim.hpp"

using namespace fanetids;

namespace {

int col(std::string_view name) {
  const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
  REQUIRE(it != kFeatureNames.end());
  return static_cast<int>(it - kFeatureNames.begin());
}

LogRecord rec(LogKind kind, NodeId origin = kNoNode, std::int64_t seq = -1, std::string note = {}) {
  LogRecord r;
  r.time = from_seconds(12.0);
  r.kind = kind;
  r.origin = origin;
  r.dest_seq = seq;
  r.note = std::move(note);
  return r;
}

FeatureWindow window(NodeId node, double start, std::initializer_list<double> head) {
  FeatureWindow w;
  w.scenario_id = "fixture";
  w.node_id = node;
  w.window_start = from_seconds(start);
  int i = 0;
  for (double v : head) w.features[i++] = v;
  return w;
}

std::vector<FeatureWindow> node_windows(NodeId node, int n) {
  std::vector<FeatureWindow> out;
  for (int i = 0; i < n; ++i) {
    auto w = window(node, 10.0 + 5.0 * i, {static_cast<double>(i)});
    w.label = i % 2 ? Label::kAttack : Label::kNormal;
    out.push_back(w);
  }
  return out;
}

ScenarioConfig small(AttackType a, double ratio) {
  ScenarioConfig c;
  c.node_count = 10;
  c.area = Eigen::Vector3d(600.0, 600.0, 200.0);
  c.sim_duration = 60.0;
  c.traffic_pairs = 2;
  c.attack_type = a;
  c.attacker_ratio = ratio;
  return c;
}

}  // namespace

TEST_CASE("schema has 31 distinct names") {
  std::set<std::string_view> names(kFeatureNames.begin(), kFeatureNames.end());
  CHECK(names.size() == 31);
  CHECK(kFeatureNames.front() == "rreq_sent");
  CHECK(kFeatureNames.back() == "delivery_ratio_local");
}

TEST_CASE("empty window keeps only state features") {
  Snapshot s{3, 2.5, 4};
  const auto f = extract_window({}, s);
  CHECK(f[col("active_routes")] == 3);
  CHECK(f[col("mean_hop_count_active")] == 2.5);
  CHECK(f[col("neighbor_count")] == 4);
  FeatureVector rest = f;
  rest[col("active_routes")] = rest[col("mean_hop_count_active")] = rest[col("neighbor_count")] = 0;
  CHECK(rest.isZero(0.0));
}

TEST_CASE("hand-counted log fixture") {
  std::vector<LogRecord> log;
  for (int i = 0; i < 5; ++i) log.push_back(rec(LogKind::kDataFwd, 1));
  log.push_back(rec(LogKind::kRreqSend, 9, 0));
  log.push_back(rec(LogKind::kRreqRecv, 3, 7));
  log.push_back(rec(LogKind::kRreqRecv, 4, 9));
  log.push_back(rec(LogKind::kRreqDup, 3, 7));
  log.push_back(rec(LogKind::kRrepRecv, 9, 12, "delta=5"));
  log.push_back(rec(LogKind::kRerrRecv, 6, -1, "n=2"));
  log.push_back(rec(LogKind::kDataDrop, 1, -1, "why=no_route"));
  log.push_back(rec(LogKind::kRouteAdd, 9, 12));
  log.push_back(rec(LogKind::kNbrAdd, 6));
  log.push_back(rec(LogKind::kCtrlDrop, 3));
  const auto f = extract_window(log, Snapshot{1, 2.0, 2});

  CHECK(f[col("data_forwarded")] == 5);
  CHECK(f[col("rreq_sent")] == 1);
  CHECK(f[col("rreq_received")] == 3);
  CHECK(f[col("duplicate_rreq_received")] == 1);
  CHECK(f[col("rrep_received")] == 1);
  CHECK(f[col("rerr_received")] == 1);
  CHECK(f[col("data_dropped_no_route")] == 1);
  CHECK(f[col("routes_added")] == 1);
  CHECK(f[col("neighbors_added")] == 1);
  CHECK(f[col("control_pkts_received_total")] == 5);
  CHECK(f[col("control_bytes_received_total")] == 3 * 24 + 20 + (4 + 8 * 2));
  CHECK(f[col("distinct_rreq_origins")] == 2);
  CHECK(f[col("rreq_rate_per_neighbor")] == 1.5);
  CHECK(f[col("max_dest_seq_seen")] == 12);
  CHECK(f[col("mean_rrep_seq_delta")] == 5);
  CHECK(f[col("delivery_ratio_local")] == doctest::Approx(5.0 / 6.0));
  CHECK(f[col("rrep_sent")] == 0);
  CHECK(f[col("data_originated")] == 0);
  CHECK((f.array() >= 0).all());
}

TEST_CASE("a flooding burst shows up at the victim") {
  NetworkOptions opt;
  opt.cfg.node_count = 1;
  opt.cfg.traffic_pairs = 0;
  opt.mobility = false;
  opt.collect_windows = false;
  std::vector<NodeState> nodes(2);
  nodes[1].id = 1;
  nodes[1].position = Eigen::Vector3d(100, 0, 0);
  Network net(opt, nodes);
  AttackProfile p;
  p.kind = AttackType::kFlooding;
  p.active_from = from_seconds(100);
  net.set_attacker(0, p);
  Rng rng(2);
  attacks::flooding_tick(net.node(0), rng, 2);
  net.run_until(from_seconds(1.0));
  const auto f = extract_window(net.log(1), Snapshot{0, 0.0, 1});
  CHECK(f[col("rreq_received")] >= 10);
  CHECK(f[col("duplicate_rreq_received")] >= 0);
}

TEST_CASE("labels follow the active phase") {
  ScenarioMeta benign;
  FeatureWindow w;
  w.window_start = from_seconds(500);
  CHECK(label_window(w, benign) == Label::kNormal);
  ScenarioMeta bh{AttackType::kBlackhole, true, from_seconds(300)};
  w.window_start = from_seconds(300);
  CHECK(label_window(w, bh) == Label::kAttack);
  w.window_start = from_seconds(295);
  CHECK(label_window(w, bh) == Label::kNormal);
}

TEST_CASE("scaler") {
  std::vector<FeatureWindow> train{window(0, 10, {0.0, 7.0}), window(0, 15, {2.0, 7.0})};
  const auto p = fit_scaler(train);
  CHECK(p.mean[0] == 1.0);
  CHECK(p.std[0] == 1.0);
  const auto a = apply_scaler(p, train[0]), b = apply_scaler(p, train[1]);
  CHECK(a.features[0] == -1.0);
  CHECK(b.features[0] == 1.0);
  CHECK(a.features[1] == 0.0);  // constant column
  CHECK(b.features[1] == 0.0);
  // Applying twice is not the identity on the once-scaled values.
  std::vector<FeatureWindow> shifted{window(0, 10, {10.0}), window(0, 15, {14.0})};
  const auto q = fit_scaler(shifted);
  const auto once = apply_scaler(q, shifted[1]);
  CHECK(apply_scaler(q, once).features[0] != once.features[0]);
  CHECK_THROWS(fit_scaler(std::vector<FeatureWindow>{}));
}

TEST_CASE("scaled training columns are standardized") {
  const auto r = run_scenario(small(AttackType::kBlackhole, 0.2));
  const auto ds = build_dataset(r.node_logs, r.cfg, "s");
  auto sp = split(ds, SplitSpec{0.8, 3, true});
  const auto p = fit_scaler(sp.train);
  apply_scaler(p, sp.train);
  const double n = static_cast<double>(sp.train.size());
  for (int j = 0; j < kFeatureCount; ++j) {
    if (p.std[j] < kScalerEpsilon) continue;
    double mean = 0.0, sq = 0.0;
    for (const auto& w : sp.train) mean += w.features[j];
    mean /= n;
    for (const auto& w : sp.train) sq += (w.features[j] - mean) * (w.features[j] - mean);
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(std::sqrt(sq / n) - 1.0) < 1e-6);
  }
}

TEST_CASE("split sizes and determinism") {
  auto one = node_windows(0, 100);
  auto s = split(one, SplitSpec{0.8, 1, true});
  CHECK(s.train.size() == 80);
  CHECK(s.test.size() == 20);
  auto again = split(one, SplitSpec{0.8, 1, true});
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  CHECK(split(one, SplitSpec{0.8, 2, true}).train != s.train);

  auto two = node_windows(0, 50);
  auto other = node_windows(1, 50);
  two.insert(two.end(), other.begin(), other.end());
  s = split(two, SplitSpec{0.8, 1, true});
  for (NodeId n : {0, 1}) {
    auto count = [&](const std::vector<FeatureWindow>& v) {
      return std::count_if(v.begin(), v.end(), [&](const FeatureWindow& w) { return w.node_id == n; });
    };
    CHECK(count(s.train) == 40);
    CHECK(count(s.test) == 10);
  }

  auto small_node = node_windows(5, 3);
  small_node.insert(small_node.end(), other.begin(), other.end());
  s = split(small_node, SplitSpec{0.8, 1, true});
  CHECK(s.undersized_nodes == std::vector<NodeId>{5});
  CHECK(std::none_of(s.test.begin(), s.test.end(), [](const FeatureWindow& w) { return w.node_id == 5; }));
}

TEST_CASE("dataset text round trip") {
  std::stringstream empty;
  write_dataset(empty, std::vector<FeatureWindow>{});
  const std::string text = empty.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  CHECK(text.rfind("scenario_id,node_id,window_start,f01,", 0) == 0);
  CHECK(read_dataset(empty).empty());

  std::vector<FeatureWindow> fx{window(0, 10, {1, 2.5, 0.125}), window(3, 15, {0, 0, 1e-5}),
                                window(50, 20, {123456, -4, 0.333333})};
  fx[1].label = Label::kAttack;
  std::stringstream s;
  write_dataset(s, fx);
  CHECK(read_dataset(s) == fx);
}

TEST_CASE("short row is rejected with its line number") {
  std::stringstream s;
  write_dataset(s, std::vector<FeatureWindow>{window(0, 10, {1}), window(0, 15, {1})});
  std::string text = s.str();
  // Drop the last feature column of the second data row (line 3).
  const auto line3 = text.find('\n', text.find('\n') + 1) + 1;
  const auto end = text.find('\n', line3);
  std::string row = text.substr(line3, end - line3);
  const auto label_comma = row.rfind(',');
  const auto last_feature = row.rfind(',', label_comma - 1);
  row.erase(last_feature, label_comma - last_feature);
  text.replace(line3, end - line3, row);
  std::istringstream in(text);
  try {
    read_dataset(in);
    FAIL("accepted a 30-feature row");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream junk(text.substr(0, text.find('\n') + 1) + "a,0,10.000000,x" + std::string(30, ',') + "0\n");
  CHECK_THROWS(read_dataset(junk));
}

TEST_CASE("features depend only on the node's own log") {
  const auto r = run_scenario(small(AttackType::kSinkhole, 0.2));
  const auto ds = build_dataset(r.node_logs, r.cfg, "loc");
  std::map<NodeId, std::vector<FeatureWindow>> by_node;
  for (const auto& w : ds) by_node[w.node_id].push_back(w);
  for (auto& [node, rows] : by_node) {
    const auto alone = extract_node(r.node_logs[node], node, "loc", from_seconds(r.cfg.warmup),
                                    from_seconds(r.cfg.window_len));
    REQUIRE(alone.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(alone[i].window_start == rows[i].window_start);
      CHECK(alone[i].features == rows[i].features);
    }
  }
}

TEST_CASE("windows tile the run and labels split about evenly") {
  const auto r = run_scenario(small(AttackType::kBlackhole, 0.2));
  const auto ds = build_dataset(r.node_logs, r.cfg, "grid");
  const SimTime len = from_seconds(r.cfg.window_len), warm = from_seconds(r.cfg.warmup);
  std::map<NodeId, std::vector<SimTime>> starts;
  long attack = 0;
  for (const auto& w : ds) {
    starts[w.node_id].push_back(w.window_start);
    attack += w.label == Label::kAttack;
  }
  CHECK(starts.size() == static_cast<std::size_t>(r.cfg.total_nodes()));
  for (auto& [node, s] : starts) {
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == warm + static_cast<SimTime>(i) * len);
    CHECK(s.back() + len <= r.end);
    CHECK(s.back() + 2 * len > r.end);
  }
  const double share = static_cast<double>(attack) / static_cast<double>(ds.size());
  const double expect = (to_seconds(r.end) - to_seconds(*r.active_from)) /
                        (to_seconds(r.end) - r.cfg.warmup);
  CHECK(share == doctest::Approx(expect).epsilon(0.02));
  CHECK(std::abs(share - 0.5) < 0.1);
}
