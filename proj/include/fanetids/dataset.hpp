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

#ifndef FANETIDS_DATASET_HPP_
#define FANETIDS_DATASET_HPP_

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fanetids/common.hpp"
#include "fanetids/node_log.hpp"
#include "fanetids/scenario_config.hpp"

namespace fanetids {

constexpr int kFeatureCount = 31;

using FeatureVector = Eigen::Matrix<double, kFeatureCount, 1>;

extern const std::array<std::string_view, kFeatureCount> kFeatureNames;

enum class Label { kNormal = 0, kAttack = 1 };

struct FeatureWindow {
  std::string scenario_id;
  NodeId node_id = 0;
  SimTime window_start = 0;
  FeatureVector features = FeatureVector::Zero();
  Label label = Label::kNormal;

  bool operator==(const FeatureWindow& o) const {
    return scenario_id == o.scenario_id && node_id == o.node_id &&
           window_start == o.window_start && features == o.features && label == o.label;
  }
};

// Features of one window from one node's records. `records` must cover
// exactly [start, start + len) and `snapshot` is the state captured when the
// window closed.
FeatureVector extract_window(std::span<const LogRecord> records, const Snapshot& snapshot);

// All windows of one node log, in time order, unlabeled (kNormal).
std::vector<FeatureWindow> extract_node(const NodeLog& log, NodeId node,
                                        const std::string& scenario_id, SimTime warmup,
                                        SimTime window_len);

struct ScenarioMeta {
  AttackType attack_type = AttackType::kNone;
  bool has_attackers = false;
  std::optional<SimTime> active_from;
};

Label label_window(const FeatureWindow& window, const ScenarioMeta& meta);

// Extracts and labels every node's windows.
std::vector<FeatureWindow> build_dataset(std::span<const NodeLog> logs, const ScenarioConfig& cfg,
                                         const std::string& scenario_id);

// Reads scenario.cfg and node_<id>.log files written by write_scenario.
std::vector<FeatureWindow> extract_scenario_dir(const std::filesystem::path& dir,
                                                const std::string& scenario_id);

constexpr double kScalerEpsilon = 1e-8;

struct ScalerParams {
  FeatureVector mean = FeatureVector::Zero();
  FeatureVector std = FeatureVector::Ones();
};

// Per-column mean and population std. Throws on an empty set.
ScalerParams fit_scaler(std::span<const FeatureWindow> train);
// (x - mean) / max(std, eps). Not idempotent: apply exactly once.
FeatureWindow apply_scaler(const ScalerParams& params, FeatureWindow window);
void apply_scaler(const ScalerParams& params, std::vector<FeatureWindow>& windows);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratify = true;
};

struct Split {
  std::vector<FeatureWindow> train;
  std::vector<FeatureWindow> test;
  std::vector<NodeId> undersized_nodes;  // < 5 windows, all sent to train
};

// Deterministic shuffle split. With stratify, each node's windows are split
// separately so every client keeps local test data. Output keeps the input's
// relative order within each side.
Split split(std::span<const FeatureWindow> windows, const SplitSpec& spec);

// CSV: scenario_id,node_id,window_start,f01..f31,label
void write_dataset(std::ostream& out, std::span<const FeatureWindow> windows);
void write_dataset(const std::filesystem::path& path, std::span<const FeatureWindow> windows);
// Throws std::runtime_error with the line number on a malformed row.
std::vector<FeatureWindow> read_dataset(std::istream& in);
std::vector<FeatureWindow> read_dataset(const std::filesystem::path& path);

}  // namespace fanetids

#endif  // FANETIDS_DATASET_HPP_
