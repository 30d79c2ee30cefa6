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

#ifndef FANETIDS_SCENARIO_CONFIG_HPP_
#define FANETIDS_SCENARIO_CONFIG_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "fanetids/common.hpp"

namespace fanetids {

enum class AttackType { kNone, kSinkhole, kBlackhole, kFlooding };

std::string_view to_string(AttackType t);
std::optional<AttackType> parse_attack_type(std::string_view text);

struct ScenarioConfig {
  int node_count = 50;                            // mobile UAVs; the GBS is extra
  Eigen::Vector3d area{12000.0, 12000.0, 300.0};  // box [0, area]
  double sim_duration = 1800.0;                   // s, per phase
  double mean_speed = 100.0;                      // m/s
  double gm_alpha = 0.5;
  double tx_range = 250.0;  // m
  int traffic_pairs = 10;
  int packet_size = 512;     // bytes
  double packet_rate = 1.0;  // packets/s per pair
  double attacker_ratio = 0.0;
  AttackType attack_type = AttackType::kNone;
  double window_len = 5.0;  // s
  double warmup = 10.0;     // s
  std::uint64_t seed = 1;

  bool operator==(const ScenarioConfig&) const = default;

  NodeId gbs_id() const { return node_count; }
  int total_nodes() const { return node_count + 1; }
  int attacker_count() const;

  // Attack runs last twice as long: a dormant phase followed by an
  // active phase of equal length.
  SimTime run_end() const;
  // Start of the active phase, or nullopt for benign scenarios.
  std::optional<SimTime> active_from() const;
};

// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& cfg);

// key=value text, keys exactly the field names above. '#' starts a comment.
// `area` is written "x,y,z". Unknown or duplicate keys are rejected.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);
std::string to_config_text(const ScenarioConfig& cfg);

}  // namespace fanetids

#endif  // FANETIDS_SCENARIO_CONFIG_HPP_
