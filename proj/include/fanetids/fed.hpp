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

// Centralized, local and federated IDS training.
//
// A Client owns its windows and never hands them out. Everything the server
// side touches is listed in ServerInputs: model parameters, gradient vectors,
// confusion counts and scalar scores.

#ifndef FANETIDS_FED_HPP_
#define FANETIDS_FED_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fanetids/common.hpp"
#include "fanetids/dataset.hpp"
#include "fanetids/eval.hpp"
#include "fanetids/nn.hpp"

namespace fanetids {

enum class Strategy { kFedAvg, kFedProx, kFedSgd };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

struct BtscConfig {
  double fraction = 0.2;
};

struct FedConfig {
  Strategy strategy = Strategy::kFedAvg;
  int global_epochs = 100;
  int local_epochs = 1;
  double mu = 0.01;  // FedProx only
  std::optional<BtscConfig> btsc;
  double participation = 1.0;  // per-round probability a client shows up
};

// Seed of one client's (or the central trainer's) training pass.
std::uint64_t epoch_seed(std::uint64_t base, int epoch, NodeId stream);
constexpr NodeId kCentralStream = -2;

LabeledData to_labeled(std::span<const FeatureWindow> windows);

class Client {
 public:
  Client(NodeId node_id, LabeledData train, LabeledData test);
  Client(NodeId node_id, std::span<const FeatureWindow> train,
         std::span<const FeatureWindow> test);

  NodeId node_id() const { return node_id_; }
  Eigen::Index train_size() const { return train_.size(); }
  Eigen::Index test_size() const { return test_.size(); }
  // True when the training set holds a single class.
  bool single_class() const;

  // `cfg.local_epochs` passes starting from `global`, seeded per
  // (cfg.seed, round, node).
  ModelParams local_update(const ModelParams& global, int round, const TrainConfig& cfg,
                           const Proximal* prox = nullptr) const;
  // Gradient of mini-batch `step` of this client's cyclic shuffled stream,
  // taken at `global`.
  Eigen::VectorXd minibatch_gradient(const ModelParams& global, int step,
                                     const TrainConfig& cfg) const;
  ConfusionCounts evaluate(const ModelParams& params) const;

 private:
  NodeId node_id_;
  LabeledData train_;
  LabeledData test_;
};

struct ClientScore {
  NodeId node_id = kNoNode;
  double metric = 0.0;
};

// Server-visible types. The privacy test walks this list.
using ServerInputs = std::tuple<ModelParams, Eigen::VectorXd, ConfusionCounts, ClientScore,
                                std::vector<ModelParams>, std::vector<Eigen::VectorXd>>;

// Coordinate-wise unweighted mean. Throws std::invalid_argument on an empty
// list or mismatched architectures/lengths.
ModelParams fedavg_aggregate(std::span<const ModelParams> updates);

// One local epoch on loss + (mu / 2) * |w - global|^2.
ModelParams fedprox_local_step(const Client& client, const ModelParams& global, double mu,
                               const TrainConfig& cfg, int round);

// One synchronized step: w <- w - lr * mean of the clients' mini-batch
// gradients at `global`.
ModelParams fedsgd_round(std::span<const Client* const> clients, const ModelParams& global,
                         double lr, int step, const TrainConfig& cfg);

struct BtscSelection {
  std::vector<NodeId> selected;  // ascending node id
  bool clamped_to_one = false;   // fraction * N rounded to zero
};

// Top ceil(fraction * N) clients by metric, ties to the lower node id.
BtscSelection btsc_select(std::span<const ClientScore> scores, double fraction);

struct RoundReport {
  int epoch = 0;  // 1-based
  ConfusionCounts global_counts;
  Metrics global;
  std::map<NodeId, double> client_accuracy;
  std::vector<NodeId> participants;
  std::int64_t bytes_up = 0;
  std::int64_t bytes_down = 0;
  bool skipped = false;  // no client showed up
};

struct FederationResult {
  ModelParams params;
  std::vector<RoundReport> reports;
  std::vector<std::string> log;
};

FederationResult run_federation(std::span<const Client> clients, const FedConfig& fed,
                                const ArchSpec& arch, const TrainConfig& train);

struct EpochMetrics {
  int epoch = 0;
  Metrics metrics;
};

struct CentralResult {
  ModelParams params;
  std::vector<EpochMetrics> curve;  // empty without a test set
};

// `epochs` passes over the pooled training data.
CentralResult train_cids(const LabeledData& train, const LabeledData* test, const ArchSpec& arch,
                         const TrainConfig& cfg, int epochs, NodeId seed_stream = kCentralStream);

struct LocalClientResult {
  NodeId node_id = kNoNode;
  ModelParams params;
  std::optional<Metrics> metrics;  // absent without local test data
  bool single_class = false;
};

struct LocalResult {
  std::vector<LocalClientResult> clients;
  Metrics mean;  // unweighted over clients with test data
  std::optional<double> best_accuracy;
  std::optional<double> worst_accuracy;
  std::vector<NodeId> excluded;  // no local test data
  std::vector<NodeId> flagged;   // single-class training data
  std::vector<EpochMetrics> curve;
};

LocalResult train_lids(std::span<const Client> clients, const ArchSpec& arch,
                       const TrainConfig& cfg, int epochs);

// Mean of per-client metrics; rates averaged over clients where defined.
Metrics mean_metrics(std::span<const Metrics> per_client);

}  // namespace fanetids

#endif  // FANETIDS_FED_HPP_
