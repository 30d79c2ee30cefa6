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

#include "fanetids/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fanetids/eval.hpp"
#include "fanetids/sim.hpp"

namespace fanetids {
namespace {

namespace fs = std::filesystem;

RoundRow to_row(int epoch, std::string strategy, const Metrics& m, std::int64_t up,
                std::int64_t down) {
  RoundRow r;
  r.epoch = epoch;
  r.strategy = std::move(strategy);
  r.acc = m.accuracy;
  r.dr = m.dr;
  r.fpr = m.fpr;
  r.bytes_up = up;
  r.bytes_down = down;
  return r;
}

ScenarioConfig desk_base() {
  ScenarioConfig c;
  c.node_count = 20;
  c.area = Eigen::Vector3d(1000.0, 1000.0, 300.0);
  c.sim_duration = 300.0;
  c.traffic_pairs = 5;
  return c;
}

const std::vector<int> kAttackRatios{5, 10, 15, 20, 25};

}  // namespace

std::optional<Variant> parse_variant(std::string_view text) {
  if (text == "c" || text == "C") return Variant::kCentral;
  if (text == "l" || text == "L") return Variant::kLocal;
  if (text == "fl" || text == "FL") return Variant::kFederated;
  return std::nullopt;
}

void TrainOptions::validate() const {
  if (variant != Variant::kFederated) {
    if (strategy) throw ConfigError("strategy", "only applies to the fl variant");
    if (btsc) throw ConfigError("btsc", "only applies to the fl variant");
  }
  if (!(btsc_fraction > 0.0 && btsc_fraction <= 1.0)) {
    throw ConfigError("btsc_fraction", "must be in (0, 1]");
  }
  if (!(mu >= 0.0)) throw ConfigError("mu", "must be nonnegative");
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw ConfigError("participation", "must be in (0, 1]");
  }
  if (global_epochs < 0) throw ConfigError("global_epochs", "must be nonnegative");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction", "must be in (0, 1)");
  }
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden", "layer sizes must be positive");
  }
}

std::string TrainOptions::label() const {
  switch (variant) {
    case Variant::kCentral: return "C";
    case Variant::kLocal: return "L";
    case Variant::kFederated: break;
  }
  std::string s = "FL";
  const Strategy st = strategy.value_or(Strategy::kFedAvg);
  if (st == Strategy::kFedProx) s += "-FedProx";
  if (st == Strategy::kFedSgd) s += "-FedSGD";
  if (btsc) s += "-BTSC";
  return s;
}

TrainOutput train_dataset(const std::vector<FeatureWindow>& windows, const TrainOptions& options,
                          const std::filesystem::path& out_dir) {
  options.validate();
  if (windows.empty()) throw std::invalid_argument("empty dataset");
  TrainOutput out;

  Split sp = split(windows, SplitSpec{options.train_fraction, options.seed, true});
  for (NodeId n : sp.undersized_nodes) {
    out.notes.push_back("node " + std::to_string(n) + " has fewer than 5 windows; all in training");
  }
  if (sp.train.empty()) throw std::invalid_argument("training split is empty");
  const ScalerParams scaler = fit_scaler(sp.train);
  apply_scaler(scaler, sp.train);
  apply_scaler(scaler, sp.test);

  const ArchSpec arch =
      options.arch == ArchKind::kCnn ? ArchSpec::cnn(options.hidden) : ArchSpec::dnn(options.hidden);
  TrainConfig cfg;
  cfg.seed = options.seed;

  std::map<NodeId, std::pair<std::vector<FeatureWindow>, std::vector<FeatureWindow>>> by_node;
  for (auto& w : sp.train) by_node[w.node_id].first.push_back(w);
  for (auto& w : sp.test) by_node[w.node_id].second.push_back(w);
  std::vector<Client> clients;
  for (const auto& [node, parts] : by_node) clients.emplace_back(node, parts.first, parts.second);

  fs::create_directories(out_dir);
  const std::string label = options.label();

  switch (options.variant) {
    case Variant::kCentral: {
      const LabeledData train = to_labeled(sp.train);
      const LabeledData test = to_labeled(sp.test);
      const auto res = train_cids(train, test.size() > 0 ? &test : nullptr, arch, cfg,
                                  options.global_epochs);
      // Every node ships its raw feature windows to the GBS once.
      const auto upload = static_cast<std::int64_t>(windows.size()) * kFeatureCount * 4;
      for (const auto& e : res.curve) out.report.push_back(to_row(e.epoch, "central", e.metrics, upload, 0));
      write_weights(out_dir / (label + ".weights"), res.params);
      break;
    }
    case Variant::kLocal: {
      const auto res = train_lids(clients, arch, cfg, options.global_epochs);
      for (std::size_t i = 0; i < res.curve.size(); ++i) {
        const bool last = i + 1 == res.curve.size();
        out.report.push_back(to_row(res.curve[i].epoch, "local", last ? res.mean : res.curve[i].metrics, 0, 0));
      }
      if (!res.excluded.empty()) out.notes.push_back(std::to_string(res.excluded.size()) + " client(s) without local test data excluded");
      if (!res.flagged.empty()) out.notes.push_back(std::to_string(res.flagged.size()) + " client(s) trained on a single class");
      if (res.best_accuracy) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "best %.6f worst %.6f", *res.best_accuracy, *res.worst_accuracy);
        out.notes.push_back(buf);
      }
      const fs::path wdir = out_dir / (label + "-weights");
      fs::create_directories(wdir);
      for (const auto& c : res.clients) {
        write_weights(wdir / ("node_" + std::to_string(c.node_id) + ".weights"), c.params);
      }
      break;
    }
    case Variant::kFederated: {
      FedConfig fed;
      fed.strategy = options.strategy.value_or(Strategy::kFedAvg);
      fed.global_epochs = options.global_epochs;
      fed.mu = options.mu;
      fed.participation = options.participation;
      if (options.btsc) fed.btsc = BtscConfig{options.btsc_fraction};
      const auto res = run_federation(clients, fed, arch, cfg);
      std::string strategy(to_string(fed.strategy));
      if (options.btsc) strategy += "+btsc";
      for (const auto& r : res.reports) {
        out.report.push_back(to_row(r.epoch, strategy, r.global, r.bytes_up, r.bytes_down));
      }
      out.notes.insert(out.notes.end(), res.log.begin(), res.log.end());
      write_weights(out_dir / (label + ".weights"), res.params);
      break;
    }
  }
  std::ofstream f(out_dir / (label + ".csv"));
  write_round_report(f, out.report);
  return out;
}

std::vector<std::string> preset_names() {
  return {"tiny", "desk", "desk-sinkhole", "desk-blackhole", "desk-flooding", "desk-strategies",
          "full"};
}

ExperimentPreset find_preset(const std::string& name) {
  ExperimentPreset p;
  p.name = name;
  p.variants = {Variant::kCentral, Variant::kLocal, Variant::kFederated};
  p.base = desk_base();
  p.ratios_percent = kAttackRatios;
  if (name == "tiny") {
    p.base.node_count = 10;
    p.base.area = Eigen::Vector3d(600.0, 600.0, 200.0);
    p.base.sim_duration = 60.0;
    p.base.traffic_pairs = 2;
    p.attacks = {AttackType::kBlackhole};
    p.ratios_percent = {10, 20};
    p.seeds = 1;
    p.global_epochs = 5;
  } else if (name == "desk") {
    p.attacks = {AttackType::kSinkhole, AttackType::kBlackhole, AttackType::kFlooding};
    p.btsc = true;
  } else if (name == "desk-sinkhole") {
    p.attacks = {AttackType::kSinkhole};
    p.btsc = true;
  } else if (name == "desk-blackhole") {
    p.attacks = {AttackType::kBlackhole};
    p.btsc = true;
  } else if (name == "desk-flooding") {
    p.attacks = {AttackType::kFlooding};
  } else if (name == "desk-strategies") {
    p.attacks = {AttackType::kBlackhole};
    p.ratios_percent = {25};
    p.variants = {Variant::kFederated};
    p.strategies = {Strategy::kFedAvg, Strategy::kFedProx, Strategy::kFedSgd};
  } else if (name == "full") {
    p.base = ScenarioConfig{};
    p.attacks = {AttackType::kSinkhole, AttackType::kBlackhole, AttackType::kFlooding};
    p.seeds = 10;
    p.btsc = true;
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
  return p;
}

std::vector<Cell> cells(const ExperimentPreset& preset) {
  std::vector<Cell> out;
  for (AttackType a : preset.attacks) {
    for (int r : preset.ratios_percent) {
      for (int s = 0; s < preset.seeds; ++s) out.push_back(Cell{a, r, s});
    }
  }
  return out;
}

ScenarioConfig cell_config(const ExperimentPreset& preset, const Cell& cell) {
  ScenarioConfig c = preset.base;
  c.attack_type = cell.ratio_percent == 0 ? AttackType::kNone : cell.attack;
  c.attacker_ratio = cell.ratio_percent / 100.0;
  c.seed = preset.base.seed + static_cast<std::uint64_t>(cell.seed_index);
  return c;
}

std::string cell_id(const Cell& cell) {
  return std::string(to_string(cell.attack)) + "-r" + std::to_string(cell.ratio_percent) + "-s" +
         std::to_string(cell.seed_index);
}

std::filesystem::path cell_dir(const std::filesystem::path& root, const Cell& cell) {
  return root / std::string(to_string(cell.attack)) / ("r" + std::to_string(cell.ratio_percent)) /
         ("s" + std::to_string(cell.seed_index));
}

std::vector<TrainOptions> cell_trainings(const ExperimentPreset& preset, const Cell& cell) {
  TrainOptions base;
  base.arch = preset.arch;
  base.global_epochs = preset.global_epochs;
  base.mu = preset.mu;
  base.seed = cell_config(preset, cell).seed;
  std::vector<TrainOptions> out;
  for (Variant v : preset.variants) {
    TrainOptions o = base;
    o.variant = v;
    if (v != Variant::kFederated) {
      out.push_back(o);
      continue;
    }
    for (Strategy s : preset.strategies) {
      o.strategy = s;
      o.btsc = false;
      out.push_back(o);
      if (preset.btsc) {
        o.btsc = true;
        out.push_back(o);
      }
    }
  }
  return out;
}

void run_cell(const ExperimentPreset& preset, const Cell& cell, const std::filesystem::path& root,
              bool write_logs) {
  const ScenarioConfig cfg = cell_config(preset, cell);
  const fs::path dir = cell_dir(root, cell);
  fs::create_directories(dir);
  const ScenarioResult sim = run_scenario(cfg);
  if (write_logs) write_scenario(sim, dir / "logs");
  {
    std::ofstream f(dir / "scenario.cfg");
    f << to_config_text(cfg);
  }
  const auto built = build_dataset(sim.node_logs, cfg, cell_id(cell));
  write_dataset(dir / "dataset.csv", built);
  // Train from the file, exactly as the manual extract -> train chain would.
  const auto windows = read_dataset(dir / "dataset.csv");
  for (const auto& opt : cell_trainings(preset, cell)) train_dataset(windows, opt, dir);
}

ReproduceSummary reproduce(const ExperimentPreset& preset, const std::filesystem::path& root,
                           int jobs) {
  const auto all = cells(preset);
  std::vector<std::string> errors(all.size());
  std::vector<char> ok(all.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < all.size(); i = next++) {
      try {
        run_cell(preset, all[i], root);
        ok[i] = 1;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(all.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ReproduceSummary s;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (ok[i]) {
      s.completed.push_back(cell_id(all[i]));
    } else {
      s.failed.push_back(cell_id(all[i]) + ": " + errors[i]);
    }
  }
  emit_comparison(root, root);
  return s;
}

}  // namespace fanetids
