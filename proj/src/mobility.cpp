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

#include "fanetids/mobility.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fanetids {
namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

// Folds `p` back into [0, hi]; returns true when it bounced an odd number of
// times, which is when the heading component must flip.
bool reflect(double& p, double hi) {
  bool flipped = false;
  while (p < 0.0 || p > hi) {
    p = p < 0.0 ? -p : 2.0 * hi - p;
    flipped = !flipped;
  }
  return flipped;
}

}  // namespace

Eigen::Vector3d NodeState::velocity() const {
  return speed * Eigen::Vector3d(std::cos(direction) * std::cos(pitch),
                                 std::sin(direction) * std::cos(pitch), std::sin(pitch));
}

NodeState gm_step(const NodeState& state, const ScenarioConfig& cfg, const GmNoise& noise,
                  double tick) {
  const double a = cfg.gm_alpha;
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("gm_alpha outside [0, 1]");
  if (state.role == Role::kGbs) throw std::invalid_argument("the GBS does not move");
  if (!state.position.allFinite() || !std::isfinite(state.speed) ||
      !std::isfinite(state.direction) || !std::isfinite(state.pitch) ||
      !std::isfinite(state.mean_direction)) {
    throw std::invalid_argument("non-finite mobility state");
  }

  const double keep = 1.0 - a;
  const double spread = std::sqrt(1.0 - a * a);
  NodeState next = state;
  next.speed = a * state.speed + keep * cfg.mean_speed + spread * noise.speed;
  next.direction = a * state.direction + keep * state.mean_direction + spread * noise.direction;
  next.pitch = a * state.pitch + spread * noise.pitch;

  next.position += next.velocity() * tick;
  if (reflect(next.position.x(), cfg.area.x())) {
    next.direction = std::numbers::pi - next.direction;
    next.mean_direction = std::numbers::pi - next.mean_direction;
  }
  if (reflect(next.position.y(), cfg.area.y())) {
    next.direction = -next.direction;
    next.mean_direction = -next.mean_direction;
  }
  if (reflect(next.position.z(), cfg.area.z())) next.pitch = -next.pitch;
  next.direction = wrap_angle(next.direction);
  next.mean_direction = wrap_angle(next.mean_direction);
  return next;
}

NodeState gm_step(const NodeState& state, const ScenarioConfig& cfg, Rng& rng, double tick) {
  std::normal_distribution<double> g(0.0, 1.0);
  GmNoise noise;
  noise.speed = g(rng);
  noise.direction = g(rng);
  noise.pitch = g(rng);
  return gm_step(state, cfg, noise, tick);
}

Adjacency neighbors(std::span<const NodeState> nodes, double range) {
  Adjacency adj(nodes.size());
  const double r2 = range * range;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if ((nodes[i].position - nodes[j].position).squaredNorm() <= r2) {
        adj[i].push_back(nodes[j].id);
        adj[j].push_back(nodes[i].id);
      }
    }
  }
  return adj;
}

}  // namespace fanetids
