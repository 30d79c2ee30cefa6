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

#include "fanetids/common.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fanetids {

std::string format_time(SimTime t) {
  const bool negative = t < 0;
  const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-t) : static_cast<std::uint64_t>(t);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%llu.%06llu", negative ? "-" : "",
                static_cast<unsigned long long>(mag / kMicrosPerSecond),
                static_cast<unsigned long long>(mag % kMicrosPerSecond));
  return buf;
}

SimTime parse_time(const std::string& text) {
  const auto dot = text.find('.');
  const std::string whole = text.substr(0, dot);
  std::string frac = dot == std::string::npos ? std::string{} : text.substr(dot + 1);
  if (whole.empty() || frac.size() > 6) throw std::invalid_argument("bad time '" + text + "'");
  frac.resize(6, '0');
  const bool negative = whole[0] == '-';
  std::int64_t secs = 0;
  std::int64_t micros = 0;
  const char* wb = whole.data() + (negative ? 1 : 0);
  auto r1 = std::from_chars(wb, whole.data() + whole.size(), secs);
  auto r2 = std::from_chars(frac.data(), frac.data() + frac.size(), micros);
  if (r1.ec != std::errc{} || r1.ptr != whole.data() + whole.size() || r2.ec != std::errc{} ||
      r2.ptr != frac.data() + frac.size()) {
    throw std::invalid_argument("bad time '" + text + "'");
  }
  const SimTime t = secs * kMicrosPerSecond + micros;
  return negative ? -t : t;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string format_exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace fanetids
