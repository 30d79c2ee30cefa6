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


#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fanetids/pipeline.hpp"

using namespace fanetids;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("fanetids-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FANETIDS_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("train options reject flags that do not fit the variant") {
  TrainOptions o;
  o.variant = Variant::kCentral;
  o.strategy = Strategy::kFedProx;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o.strategy.reset();
  o.btsc = true;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o.btsc = false;
  CHECK_NOTHROW(o.validate());

  TrainOptions fl;
  fl.btsc_fraction = 0.0;
  CHECK_THROWS_AS(fl.validate(), ConfigError);
  fl.btsc_fraction = 0.2;
  fl.participation = 1.5;
  CHECK_THROWS_AS(fl.validate(), ConfigError);
}

TEST_CASE("output labels") {
  TrainOptions o;
  CHECK(o.label() == "FL");
  o.btsc = true;
  CHECK(o.label() == "FL-BTSC");
  o.strategy = Strategy::kFedSgd;
  CHECK(o.label() == "FL-FedSGD-BTSC");
  o.variant = Variant::kLocal;
  CHECK(o.label() == "L");
}

TEST_CASE("presets") {
  CHECK_THROWS_AS(find_preset("nope"), ConfigError);
  for (const auto& name : preset_names()) {
    const auto p = find_preset(name);
    for (const auto& c : cells(p)) CHECK_NOTHROW(validate(cell_config(p, c)));
  }
  const auto desk = find_preset("desk");
  CHECK(cells(desk).size() == 3 * 5 * 5);
  const auto labels = [&](const ExperimentPreset& p) {
    std::vector<std::string> out;
    for (const auto& t : cell_trainings(p, cells(p).front())) out.push_back(t.label());
    return out;
  };
  CHECK(labels(desk) == std::vector<std::string>{"C", "L", "FL", "FL-BTSC"});
  CHECK(labels(find_preset("desk-strategies")) ==
        std::vector<std::string>{"FL", "FL-FedProx", "FL-FedSGD"});
}

TEST_CASE("tiny preset end to end") {
  const auto a = scratch("tiny-a"), b = scratch("tiny-b");
  const auto t0 = std::chrono::steady_clock::now();
  const auto sa = reproduce(find_preset("tiny"), a, 2);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(sa.failed.empty());
  CHECK(sa.completed.size() == 2);
  CHECK(secs < 60.0);

  const auto table = slurp(a / "comparison.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 2 * 3);
  CHECK(fs::exists(a / "blackhole" / "r10" / "s0" / "dataset.csv"));

  reproduce(find_preset("tiny"), b, 1);
  CHECK(slurp(b / "comparison.csv") == table);
  CHECK(slurp(b / "blackhole" / "r20" / "s0" / "FL.csv") ==
        slurp(a / "blackhole" / "r20" / "s0" / "FL.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("a federated-only run leaves other variants absent") {
  auto p = find_preset("tiny");
  p.variants = {Variant::kFederated};
  p.ratios_percent = {20};
  const auto root = scratch("fl-only");
  CHECK(reproduce(p, root, 1).failed.empty());
  for (const auto& row : collect_comparison(root)) CHECK(row.variant == "FL");
  CHECK_FALSE(fs::exists(root / "blackhole" / "r20" / "s0" / "C.csv"));
  fs::remove_all(root);
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch("exit");
  CHECK(run_cli("reproduce --list") == 0);
  CHECK(run_cli("train " + (dir / "missing.csv").string() + " --variant c --strategy fedprox") == 2);
  CHECK(run_cli("train " + (dir / "missing.csv").string() + " --variant fl") == 1);

  ScenarioConfig bad = find_preset("tiny").base;
  bad.attack_type = AttackType::kBlackhole;
  bad.attacker_ratio = 0.3;
  {
    std::ofstream out(dir / "bad.cfg");
    out << to_config_text(bad);
  }
  CHECK(run_cli("simulate " + (dir / "bad.cfg").string() + " --out " + (dir / "o").string()) == 2);
  fs::remove_all(dir);
}
