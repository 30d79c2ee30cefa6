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

#ifndef FANETIDS_COMMON_HPP_
#define FANETIDS_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace fanetids {

// Simulation time in integer microseconds. Keeps event ordering exact and
// lets logs print times that parse back to the same value.
using SimTime = std::int64_t;
constexpr SimTime kMicrosPerSecond = 1'000'000;

inline SimTime from_seconds(double s) {
  return static_cast<SimTime>(std::llround(s * static_cast<double>(kMicrosPerSecond)));
}
inline double to_seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(kMicrosPerSecond);
}

// "12.345000" style, exact for any SimTime.
std::string format_time(SimTime t);
// Inverse of format_time; throws std::invalid_argument on malformed input.
SimTime parse_time(const std::string& text);

using NodeId = int;
constexpr NodeId kNoNode = -1;

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Mixes a base seed with any number of integer tags into an independent
// stream seed. Used for every seeded stream in the project so that streams
// never share state.
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t base, Tags... tags) {
  std::uint64_t h = splitmix64(base);
  ((h = splitmix64(h ^ static_cast<std::uint64_t>(tags))), ...);
  return h;
}

// Stream tags.
enum class Stream : std::uint64_t {
  kMobility = 0x10,
  kTraffic = 0x20,
  kAttackers = 0x30,
  kFlooding = 0x40,
  kAppPhase = 0x50,
  kSplit = 0x60,
  kInit = 0x70,
  kEpoch = 0x80,
  kDropout = 0x90,
  kParticipation = 0xa0,
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Shortest decimal text that parses back to exactly `v`.
std::string format_exact(double v);

}  // namespace fanetids

#endif  // FANETIDS_COMMON_HPP_
