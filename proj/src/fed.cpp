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

#include "fanetids/fed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fanetids {
namespace {

// Running mean in a canonical (lexicographic) order of the inputs: exact
// for identical inputs and independent of the order they arrive in.
Eigen::VectorXd canonical_mean(std::span<const Eigen::VectorXd* const> vs) {
  std::vector<const Eigen::VectorXd*> order(vs.begin(), vs.end());
  std::sort(order.begin(), order.end(), [](const Eigen::VectorXd* a, const Eigen::VectorXd* b) {
    return std::lexicographical_compare(a->data(), a->data() + a->size(), b->data(),
                                        b->data() + b->size());
  });
  Eigen::VectorXd m = *order.front();
  for (std::size_t k = 1; k < order.size(); ++k) {
    m += (*order[k] - m) / static_cast<double>(k + 1);
  }
  return m;
}

double local_accuracy(const Client& c, const ModelParams& p) {
  if (c.test_size() == 0) return 0.0;
  return metrics(c.evaluate(p)).accuracy;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kFedAvg: return "fedavg";
    case Strategy::kFedProx: return "fedprox";
    case Strategy::kFedSgd: return "fedsgd";
  }
  return "fedavg";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (auto s : {Strategy::kFedAvg, Strategy::kFedProx, Strategy::kFedSgd}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::uint64_t epoch_seed(std::uint64_t base, int epoch, NodeId stream) {
  return derive_seed(base, Stream::kEpoch, epoch, stream);
}

LabeledData to_labeled(std::span<const FeatureWindow> windows) {
  LabeledData d;
  d.x.resize(static_cast<Eigen::Index>(windows.size()), kFeatureCount);
  d.y.resize(static_cast<Eigen::Index>(windows.size()));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    d.x.row(static_cast<Eigen::Index>(i)) = windows[i].features.transpose();
    d.y[static_cast<Eigen::Index>(i)] = windows[i].label == Label::kAttack ? 1.0 : 0.0;
  }
  return d;
}

Client::Client(NodeId node_id, LabeledData train, LabeledData test)
    : node_id_(node_id), train_(std::move(train)), test_(std::move(test)) {}

Client::Client(NodeId node_id, std::span<const FeatureWindow> train,
               std::span<const FeatureWindow> test)
    : Client(node_id, to_labeled(train), to_labeled(test)) {}

bool Client::single_class() const {
  if (train_.size() == 0) return true;
  return train_.y.minCoeff() == train_.y.maxCoeff();
}

ModelParams Client::local_update(const ModelParams& global, int round, const TrainConfig& cfg,
                                 const Proximal* prox) const {
  ModelParams p = global;
  if (train_.size() == 0) return p;
  for (int e = 0; e < cfg.local_epochs; ++e) {
    TrainConfig c = cfg;
    c.seed = epoch_seed(cfg.seed, round * cfg.local_epochs + e, node_id_);
    p = sgd_epoch(p, train_, c, prox);
  }
  return p;
}

Eigen::VectorXd Client::minibatch_gradient(const ModelParams& global, int step,
                                           const TrainConfig& cfg) const {
  if (train_.size() == 0) throw std::invalid_argument("client has no training data");
  const Eigen::Index n = train_.size();
  const int batches = static_cast<int>((n + cfg.batch_size - 1) / cfg.batch_size);
  const int pass = step / batches;
  const int b = step % batches;
  const std::uint64_t seed = epoch_seed(cfg.seed, pass, node_id_);
  const auto order = epoch_order(n, seed);
  RowMatrix x;
  Eigen::VectorXd y;
  const Eigen::Index begin = static_cast<Eigen::Index>(b) * cfg.batch_size;
  gather_batch(train_, order, begin, std::min<Eigen::Index>(begin + cfg.batch_size, n), x, y);
  Rng drop(derive_seed(seed, Stream::kDropout, static_cast<std::uint64_t>(b)));
  return loss_and_grad(global, x, y, &drop).grad;
}

ConfusionCounts Client::evaluate(const ModelParams& params) const {
  const auto pred = predict_labels(params, test_.x);
  std::vector<int> actual(static_cast<std::size_t>(test_.size()));
  for (Eigen::Index i = 0; i < test_.size(); ++i) actual[i] = test_.y[i] > 0.5 ? 1 : 0;
  return count_confusion(pred, actual);
}

ModelParams fedavg_aggregate(std::span<const ModelParams> updates) {
  if (updates.empty()) throw std::invalid_argument("nothing to aggregate");
  std::vector<const Eigen::VectorXd*> ws;
  for (const auto& u : updates) {
    if (!(u.arch == updates.front().arch) || u.weights.size() != updates.front().weights.size()) {
      throw std::invalid_argument("updates disagree on architecture or length");
    }
    ws.push_back(&u.weights);
  }
  return ModelParams{updates.front().arch, canonical_mean(ws)};
}

ModelParams fedprox_local_step(const Client& client, const ModelParams& global, double mu,
                               const TrainConfig& cfg, int round) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
  const Proximal prox{&global.weights, mu};
  return client.local_update(global, round, cfg, &prox);
}

ModelParams fedsgd_round(std::span<const Client* const> clients, const ModelParams& global,
                         double lr, int step, const TrainConfig& cfg) {
  std::vector<Eigen::VectorXd> grads;
  for (const Client* c : clients) {
    if (c->train_size() > 0) grads.push_back(c->minibatch_gradient(global, step, cfg));
  }
  if (grads.empty()) throw std::invalid_argument("no client can compute a gradient");
  std::vector<const Eigen::VectorXd*> ptrs;
  for (const auto& g : grads) ptrs.push_back(&g);
  ModelParams out = global;
  sgd_step(out.weights, canonical_mean(ptrs), lr);
  return out;
}

BtscSelection btsc_select(std::span<const ClientScore> scores, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction outside (0, 1]");
  if (scores.empty()) throw std::invalid_argument("no clients to rank");
  std::vector<ClientScore> ranked(scores.begin(), scores.end());
  std::sort(ranked.begin(), ranked.end(), [](const ClientScore& a, const ClientScore& b) {
    if (a.metric != b.metric) return a.metric > b.metric;
    return a.node_id < b.node_id;
  });
  BtscSelection sel;
  const double share = fraction * static_cast<double>(ranked.size());
  // Less than one client's worth still keeps the best client, with a warning.
  sel.clamped_to_one = share < 1.0;
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(share - 1e-9)));
  for (std::size_t i = 0; i < k; ++i) sel.selected.push_back(ranked[i].node_id);
  std::sort(sel.selected.begin(), sel.selected.end());
  return sel;
}

FederationResult run_federation(std::span<const Client> clients, const FedConfig& fed,
                                const ArchSpec& arch, const TrainConfig& train) {
  if (clients.empty()) throw std::invalid_argument("federation without clients");
  if (fed.btsc && !(fed.btsc->fraction > 0.0 && fed.btsc->fraction <= 1.0)) {
    throw std::invalid_argument("btsc fraction outside (0, 1]");
  }
  if (!(fed.participation > 0.0 && fed.participation <= 1.0)) {
    throw std::invalid_argument("participation outside (0, 1]");
  }
  FederationResult res;
  res.params = init_params(arch, train.seed);
  TrainConfig cfg = train;
  cfg.local_epochs = fed.local_epochs;
  const auto w_count = static_cast<std::int64_t>(res.params.weights.size());

  // Clients in node-id order; those without training data never train.
  std::vector<const Client*> trainers;
  for (const auto& c : clients) {
    if (c.train_size() > 0) trainers.push_back(&c);
  }
  std::sort(trainers.begin(), trainers.end(),
            [](const Client* a, const Client* b) { return a->node_id() < b->node_id(); });
  if (trainers.empty()) throw std::invalid_argument("no client holds training data");

  std::map<NodeId, double> score;
  Rng presence(derive_seed(train.seed, Stream::kParticipation));
  std::bernoulli_distribution shows_up(fed.participation);
  int sgd_step_index = 0;

  for (int round = 0; round < fed.global_epochs; ++round) {
    RoundReport rep;
    rep.epoch = round + 1;

    std::vector<const Client*> chosen = trainers;
    if (fed.btsc && round > 0) {
      std::vector<ClientScore> scores;
      for (const Client* c : trainers) scores.push_back({c->node_id(), score[c->node_id()]});
      const auto sel = btsc_select(scores, fed.btsc->fraction);
      if (sel.clamped_to_one) res.log.push_back("round " + std::to_string(rep.epoch) + ": BTSC clamped to one client");
      chosen.clear();
      for (const Client* c : trainers) {
        if (std::binary_search(sel.selected.begin(), sel.selected.end(), c->node_id())) {
          chosen.push_back(c);
        }
      }
    }
    if (fed.participation < 1.0) {
      std::vector<const Client*> present;
      for (const Client* c : trainers) {
        const bool here = shows_up(presence);
        if (here && std::find(chosen.begin(), chosen.end(), c) != chosen.end()) present.push_back(c);
      }
      if (present.size() < chosen.size()) {
        res.log.push_back("round " + std::to_string(rep.epoch) + ": " +
                          std::to_string(chosen.size() - present.size()) + " client(s) dropped out");
      }
      chosen = std::move(present);
    }

    if (chosen.empty()) {
      rep.skipped = true;
      res.log.push_back("round " + std::to_string(rep.epoch) + ": no client available, skipped");
    } else if (fed.strategy == Strategy::kFedSgd) {
      int steps = 0;
      for (const Client* c : chosen) {
        steps = std::max<int>(steps, static_cast<int>((c->train_size() + cfg.batch_size - 1) /
                                                      cfg.batch_size));
      }
      for (int s = 0; s < steps; ++s) {
        res.params = fedsgd_round(chosen, res.params, cfg.learning_rate, sgd_step_index++, cfg);
      }
      for (const Client* c : chosen) {
        rep.participants.push_back(c->node_id());
        score[c->node_id()] = local_accuracy(*c, res.params);
        rep.client_accuracy[c->node_id()] = score[c->node_id()];
      }
      rep.bytes_up = rep.bytes_down =
          static_cast<std::int64_t>(chosen.size()) * w_count * 4 * steps;
    } else {
      std::vector<ModelParams> updates;
      for (const Client* c : chosen) {
        ModelParams u = fed.strategy == Strategy::kFedProx
                            ? fedprox_local_step(*c, res.params, fed.mu, cfg, round)
                            : c->local_update(res.params, round, cfg);
        rep.participants.push_back(c->node_id());
        score[c->node_id()] = local_accuracy(*c, u);
        rep.client_accuracy[c->node_id()] = score[c->node_id()];
        updates.push_back(std::move(u));
      }
      res.params = fedavg_aggregate(updates);
      rep.bytes_up = rep.bytes_down = static_cast<std::int64_t>(chosen.size()) * w_count * 4;
    }

    for (const auto& c : clients) {
      if (c.test_size() > 0) rep.global_counts += c.evaluate(res.params);
    }
    if (rep.global_counts.total() > 0) rep.global = metrics(rep.global_counts);
    res.reports.push_back(std::move(rep));
  }
  return res;
}

CentralResult train_cids(const LabeledData& train, const LabeledData* test, const ArchSpec& arch,
                         const TrainConfig& cfg, int epochs, NodeId seed_stream) {
  if (train.size() == 0) throw std::invalid_argument("C-IDS needs training data");
  CentralResult res;
  res.params = init_params(arch, cfg.seed);
  std::vector<int> actual;
  if (test != nullptr) {
    for (Eigen::Index i = 0; i < test->size(); ++i) actual.push_back(test->y[i] > 0.5 ? 1 : 0);
  }
  for (int e = 0; e < epochs; ++e) {
    TrainConfig c = cfg;
    c.seed = epoch_seed(cfg.seed, e, seed_stream);
    res.params = sgd_epoch(res.params, train, c);
    if (!actual.empty()) {
      const auto pred = predict_labels(res.params, test->x);
      res.curve.push_back({e + 1, metrics(count_confusion(pred, actual))});
    }
  }
  return res;
}

Metrics mean_metrics(std::span<const Metrics> per_client) {
  Metrics m;
  if (per_client.empty()) return m;
  std::vector<double> dr, fpr;
  for (const auto& c : per_client) {
    m.accuracy += c.accuracy;
    if (c.dr) dr.push_back(*c.dr);
    if (c.fpr) fpr.push_back(*c.fpr);
  }
  m.accuracy /= static_cast<double>(per_client.size());
  if (!dr.empty()) m.dr = std::accumulate(dr.begin(), dr.end(), 0.0) / static_cast<double>(dr.size());
  if (!fpr.empty()) {
    m.fpr = std::accumulate(fpr.begin(), fpr.end(), 0.0) / static_cast<double>(fpr.size());
  }
  return m;
}

LocalResult train_lids(std::span<const Client> clients, const ArchSpec& arch,
                       const TrainConfig& cfg, int epochs) {
  LocalResult res;
  std::vector<std::vector<double>> acc_by_epoch(static_cast<std::size_t>(epochs));
  for (const auto& c : clients) {
    LocalClientResult r;
    r.node_id = c.node_id();
    r.single_class = c.single_class();
    r.params = init_params(arch, cfg.seed);
    TrainConfig one = cfg;
    one.local_epochs = 1;
    for (int e = 0; e < epochs; ++e) {
      r.params = c.local_update(r.params, e, one);
      if (c.test_size() > 0) acc_by_epoch[e].push_back(local_accuracy(c, r.params));
    }
    if (c.test_size() > 0) {
      r.metrics = metrics(c.evaluate(r.params));
    } else {
      res.excluded.push_back(c.node_id());
    }
    if (r.single_class) res.flagged.push_back(c.node_id());
    res.clients.push_back(std::move(r));
  }
  std::vector<Metrics> per;
  for (const auto& r : res.clients) {
    if (!r.metrics) continue;
    per.push_back(*r.metrics);
    const double a = r.metrics->accuracy;
    res.best_accuracy = res.best_accuracy ? std::max(*res.best_accuracy, a) : a;
    res.worst_accuracy = res.worst_accuracy ? std::min(*res.worst_accuracy, a) : a;
  }
  res.mean = mean_metrics(per);
  for (int e = 0; e < epochs; ++e) {
    const auto& v = acc_by_epoch[e];
    if (v.empty()) continue;
    Metrics m;
    m.accuracy = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    res.curve.push_back({e + 1, m});
  }
  return res;
}

}  // namespace fanetids
