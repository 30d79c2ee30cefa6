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

#ifndef FANETIDS_MOBILITY_HPP_
#define FANETIDS_MOBILITY_HPP_

#include <Eigen/Core>

#include <span>
#include <vector>

#include "fanetids/common.hpp"
#include "fanetids/scenario_config.hpp"

namespace fanetids {

constexpr double kMobilityTickSeconds = 0.5;

enum class Role { kSource, kDestination, kRelay, kAttacker, kGbs };

struct NodeState {
  NodeId id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double speed = 0.0;      // m/s
  double direction = 0.0;  // azimuth, rad
  double pitch = 0.0;      // elevation, rad
  // Gauss-Markov mean heading; mirrored together with `direction` on walls.
  double mean_direction = 0.0;
  Role role = Role::kRelay;

  Eigen::Vector3d velocity() const;
};

// One standard-normal draw per Gauss-Markov component.
struct GmNoise {
  double speed = 0.0;
  double direction = 0.0;
  double pitch = 0.0;
};

// 3D Gauss-Markov update over one mobility tick:
//
//   x_n = alpha * x_{n-1} + (1 - alpha) * mean + sqrt(1 - alpha^2) * g
//
// for speed, direction and pitch (mean pitch 0), then the node advances by
// the new velocity for `tick` seconds. Walls reflect: the position folds back
// inside and the heading mirrors. Throws std::invalid_argument for alpha
// outside [0, 1], a non-finite state or a GBS node.
NodeState gm_step(const NodeState& state, const ScenarioConfig& cfg, const GmNoise& noise,
                  double tick = kMobilityTickSeconds);
NodeState gm_step(const NodeState& state, const ScenarioConfig& cfg, Rng& rng,
                  double tick = kMobilityTickSeconds);

// Sorted neighbor lists: j in adj[i] iff |p_i - p_j| <= range and i != j.
// Indexed by position in `nodes`, which must be ordered by id.
using Adjacency = std::vector<std::vector<NodeId>>;
Adjacency neighbors(std::span<const NodeState> nodes, double range);

}  // namespace fanetids

#endif  // FANETIDS_MOBILITY_HPP_
