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

#include "fanetids/scenario_config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fanetids {
namespace {

constexpr std::array<double, 6> kAllowedRatios{0.0, 0.05, 0.10, 0.15, 0.20, 0.25};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "not a number: '" + v + "'");
  }
  return out;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw ConfigError(key, "not an integer: '" + v + "'");
  }
  return out;
}

}  // namespace

std::string_view to_string(AttackType t) {
  switch (t) {
    case AttackType::kNone: return "none";
    case AttackType::kSinkhole: return "sinkhole";
    case AttackType::kBlackhole: return "blackhole";
    case AttackType::kFlooding: return "flooding";
  }
  return "none";
}

std::optional<AttackType> parse_attack_type(std::string_view text) {
  for (auto t : {AttackType::kNone, AttackType::kSinkhole, AttackType::kBlackhole,
                 AttackType::kFlooding}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

int ScenarioConfig::attacker_count() const {
  return static_cast<int>(std::lround(attacker_ratio * node_count));
}

SimTime ScenarioConfig::run_end() const {
  const SimTime phase = from_seconds(sim_duration);
  return active_from() ? 2 * phase : phase;
}

std::optional<SimTime> ScenarioConfig::active_from() const {
  if (attack_type == AttackType::kNone || attacker_count() == 0) return std::nullopt;
  return from_seconds(sim_duration);
}

void validate(const ScenarioConfig& c) {
  if (c.node_count < 2) throw ConfigError("node_count", "need at least 2 nodes");
  for (int i = 0; i < 3; ++i) {
    if (!(c.area[i] > 0.0) || !std::isfinite(c.area[i])) {
      throw ConfigError("area", "dimensions must be positive");
    }
  }
  if (!(c.sim_duration > 0.0)) throw ConfigError("sim_duration", "must be positive");
  if (!(c.mean_speed >= 0.0)) throw ConfigError("mean_speed", "must be nonnegative");
  if (!(c.gm_alpha >= 0.0 && c.gm_alpha <= 1.0)) throw ConfigError("gm_alpha", "must be in [0, 1]");
  if (!(c.tx_range > 0.0)) throw ConfigError("tx_range", "must be positive");
  if (c.traffic_pairs < 0) throw ConfigError("traffic_pairs", "must be nonnegative");
  if (c.packet_size <= 0) throw ConfigError("packet_size", "must be positive");
  if (!(c.packet_rate > 0.0)) throw ConfigError("packet_rate", "must be positive");
  if (!(c.window_len > 0.0)) throw ConfigError("window_len", "must be positive");
  if (!(c.warmup >= 0.0)) throw ConfigError("warmup", "must be nonnegative");
  if (!(c.warmup < c.sim_duration)) throw ConfigError("warmup", "must be below sim_duration");

  bool allowed = false;
  for (double r : kAllowedRatios) allowed = allowed || std::abs(c.attacker_ratio - r) < 1e-9;
  if (!allowed) {
    throw ConfigError("attacker_ratio", "must be one of 0, 0.05, 0.10, 0.15, 0.20, 0.25");
  }
  const bool none = c.attack_type == AttackType::kNone;
  if (none != (c.attacker_ratio == 0.0)) {
    throw ConfigError("attacker_ratio", "must be 0 exactly when attack_type is none");
  }
  if (!none && c.attacker_count() == 0) {
    throw ConfigError("attacker_ratio", "rounds to 0 attackers for " +
                                            std::to_string(c.node_count) + " nodes");
  }
  if (c.node_count < 2 * c.traffic_pairs + c.attacker_count()) {
    throw ConfigError("node_count", "too small for " + std::to_string(c.traffic_pairs) +
                                        " pairs and " + std::to_string(c.attacker_count()) +
                                        " attackers");
  }
}

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig c;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");

    if (key == "node_count") {
      c.node_count = parse_integer<int>(key, v);
    } else if (key == "area") {
      std::stringstream ss(v);
      std::string part;
      int i = 0;
      while (std::getline(ss, part, ',')) {
        if (i == 3) throw ConfigError(key, "expected x,y,z");
        c.area[i++] = parse_double(key, trim(part));
      }
      if (i != 3) throw ConfigError(key, "expected x,y,z");
    } else if (key == "sim_duration") {
      c.sim_duration = parse_double(key, v);
    } else if (key == "mean_speed") {
      c.mean_speed = parse_double(key, v);
    } else if (key == "gm_alpha") {
      c.gm_alpha = parse_double(key, v);
    } else if (key == "tx_range") {
      c.tx_range = parse_double(key, v);
    } else if (key == "traffic_pairs") {
      c.traffic_pairs = parse_integer<int>(key, v);
    } else if (key == "packet_size") {
      c.packet_size = parse_integer<int>(key, v);
    } else if (key == "packet_rate") {
      c.packet_rate = parse_double(key, v);
    } else if (key == "attacker_ratio") {
      c.attacker_ratio = parse_double(key, v);
    } else if (key == "attack_type") {
      auto t = parse_attack_type(v);
      if (!t) throw ConfigError(key, "unknown attack type '" + v + "'");
      c.attack_type = *t;
    } else if (key == "window_len") {
      c.window_len = parse_double(key, v);
    } else if (key == "warmup") {
      c.warmup = parse_double(key, v);
    } else if (key == "seed") {
      c.seed = parse_integer<std::uint64_t>(key, v);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

std::string to_config_text(const ScenarioConfig& c) {
  std::ostringstream o;
  o << "node_count=" << c.node_count << '\n'
    << "area=" << format_exact(c.area.x()) << ',' << format_exact(c.area.y()) << ','
    << format_exact(c.area.z()) << '\n'
    << "sim_duration=" << format_exact(c.sim_duration) << '\n'
    << "mean_speed=" << format_exact(c.mean_speed) << '\n'
    << "gm_alpha=" << format_exact(c.gm_alpha) << '\n'
    << "tx_range=" << format_exact(c.tx_range) << '\n'
    << "traffic_pairs=" << c.traffic_pairs << '\n'
    << "packet_size=" << c.packet_size << '\n'
    << "packet_rate=" << format_exact(c.packet_rate) << '\n'
    << "attacker_ratio=" << format_exact(c.attacker_ratio) << '\n'
    << "attack_type=" << to_string(c.attack_type) << '\n'
    << "window_len=" << format_exact(c.window_len) << '\n'
    << "warmup=" << format_exact(c.warmup) << '\n'
    << "seed=" << c.seed << '\n';
  return o.str();
}

}  // namespace fanetids
