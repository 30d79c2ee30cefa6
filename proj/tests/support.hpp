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


// Fixtures shared by the unit tests and the acceptance binary.

#ifndef FANETIDS_TESTS_SUPPORT_HPP_
#define FANETIDS_TESTS_SUPPORT_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <vector>

#include "fanetids/common.hpp"
#include "fanetids/mobility.hpp"
#include "fanetids/nn.hpp"

namespace fanetids::testing {

// Two Gaussian blobs in `dim` dimensions, centers at -shift and +shift on
// every axis. Label 1 for the positive blob.
inline LabeledData blobs(int n, std::uint64_t seed, double shift = 1.5, int dim = 31) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  LabeledData d;
  d.x.resize(n, dim);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double label = i % 2;
    d.y[i] = label;
    for (int j = 0; j < dim; ++j) d.x(i, j) = g(rng) + (label > 0 ? shift : -shift);
  }
  return d;
}

inline LabeledData random_batch(int n, std::uint64_t seed, int dim = 31) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  LabeledData d;
  d.x.resize(n, dim);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.y[i] = coin(rng) ? 1.0 : 0.0;
    for (int j = 0; j < dim; ++j) d.x(i, j) = g(rng);
  }
  return d;
}

// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over all
// coordinates, numeric by central differences with step h. The floor keeps
// coordinates whose gradient is below finite-difference resolution from
// dominating. ReLU and max-pool make the loss piecewise smooth: when the two
// one-sided slopes disagree a kink lies inside [w - h, w + h], and that
// coordinate is differenced again with h / 10. `kinks` counts them.
inline double max_fd_relative_error(const ModelParams& p, const LabeledData& d, double h = 1e-5,
                                    double floor = 1e-5, int* kinks = nullptr) {
  const auto lg = loss_and_grad(p, d.x, d.y, nullptr);
  const Eigen::VectorXd& g = lg.grad;
  ModelParams q = p;
  auto loss_at = [&](Eigen::Index i, double w) {
    q.weights[i] = w;
    const double l = loss_and_grad(q, d.x, d.y, nullptr).loss;
    q.weights[i] = p.weights[i];
    return l;
  };
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.weights.size(); ++i) {
    const double up = loss_at(i, p.weights[i] + h);
    const double down = loss_at(i, p.weights[i] - h);
    double num = (up - down) / (2.0 * h);
    const double fwd = (up - lg.loss) / h, bwd = (lg.loss - down) / h;
    if (std::abs(fwd - bwd) > 1e-3 * std::max({std::abs(fwd), std::abs(bwd), floor})) {
      const double hs = h / 10.0;
      num = (loss_at(i, p.weights[i] + hs) - loss_at(i, p.weights[i] - hs)) / (2.0 * hs);
      if (kinks) ++*kinks;
    }
    const double den = std::max({std::abs(g[i]), std::abs(num), floor});
    worst = std::max(worst, std::abs(g[i] - num) / den);
  }
  return worst;
}

// Uniform random positions in a box, redrawn until the range-disc graph is
// connected.
inline std::vector<NodeState> connected_topology(int n, double side, double range, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, side);
  for (;;) {
    std::vector<NodeState> nodes(n);
    for (int i = 0; i < n; ++i) {
      nodes[i].id = i;
      nodes[i].position = Eigen::Vector3d(u(rng), u(rng), 0.0);
    }
    const auto adj = neighbors(nodes, range);
    std::vector<bool> seen(n, false);
    std::deque<int> q{0};
    seen[0] = true;
    int reached = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (NodeId w : adj[v]) {
        if (!seen[w]) seen[w] = true, ++reached, q.push_back(w);
      }
    }
    if (reached == n) return nodes;
  }
}

// Breadth-first hop distances from `src` (-1 when unreachable).
inline std::vector<int> bfs_hops(const Adjacency& adj, NodeId src) {
  std::vector<int> d(adj.size(), -1);
  std::deque<NodeId> q{src};
  d[src] = 0;
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop_front();
    for (NodeId w : adj[v]) {
      if (d[w] < 0) d[w] = d[v] + 1, q.push_back(w);
    }
  }
  return d;
}

}  // namespace fanetids::testing

#endif  // FANETIDS_TESTS_SUPPORT_HPP_
