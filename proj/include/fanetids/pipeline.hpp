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

// End-to-end orchestration behind the command line: simulate, extract,
// train, evaluate and the experiment presets that chain them.

#ifndef FANETIDS_PIPELINE_HPP_
#define FANETIDS_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fanetids/dataset.hpp"
#include "fanetids/fed.hpp"
#include "fanetids/nn.hpp"
#include "fanetids/scenario_config.hpp"

namespace fanetids {

enum class Variant { kCentral, kLocal, kFederated };

std::optional<Variant> parse_variant(std::string_view text);

struct TrainOptions {
  Variant variant = Variant::kFederated;
  std::optional<Strategy> strategy;  // FL only
  bool btsc = false;                 // FL only
  double btsc_fraction = 0.2;
  double mu = 0.01;
  double participation = 1.0;
  ArchKind arch = ArchKind::kCnn;
  std::vector<int> hidden{16, 8};
  int global_epochs = 100;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;

  // Throws ConfigError when flags do not fit the variant.
  void validate() const;
  // File stem of the outputs: C, L, FL, FL-BTSC, FL-FedProx, FL-FedSGD-BTSC, ...
  std::string label() const;
};

struct TrainOutput {
  std::vector<RoundRow> report;
  std::vector<std::string> notes;
};

// Splits, scales (fit on the pooled training split), trains and writes
// <label>.csv plus weights into `out_dir`.
TrainOutput train_dataset(const std::vector<FeatureWindow>& windows, const TrainOptions& options,
                          const std::filesystem::path& out_dir);

struct ExperimentPreset {
  std::string name;
  ScenarioConfig base;
  std::vector<AttackType> attacks;
  std::vector<int> ratios_percent;
  int seeds = 5;
  std::vector<Variant> variants;
  std::vector<Strategy> strategies{Strategy::kFedAvg};
  bool btsc = false;
  ArchKind arch = ArchKind::kCnn;
  int global_epochs = 100;
  double mu = 0.01;
};

std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name.
ExperimentPreset find_preset(const std::string& name);

struct Cell {
  AttackType attack = AttackType::kNone;
  int ratio_percent = 0;
  int seed_index = 0;
};

std::vector<Cell> cells(const ExperimentPreset& preset);
ScenarioConfig cell_config(const ExperimentPreset& preset, const Cell& cell);
std::string cell_id(const Cell& cell);
std::filesystem::path cell_dir(const std::filesystem::path& root, const Cell& cell);
std::vector<TrainOptions> cell_trainings(const ExperimentPreset& preset, const Cell& cell);

// simulate -> dataset.csv -> (re-read) -> every training of the cell.
void run_cell(const ExperimentPreset& preset, const Cell& cell, const std::filesystem::path& root,
              bool write_logs = false);

struct ReproduceSummary {
  std::vector<std::string> completed;
  std::vector<std::string> failed;  // "cell: reason"
};

// Runs every cell on `jobs` workers, then writes the comparison artifacts
// into `root`. Failed cells are listed; completed cells are kept.
ReproduceSummary reproduce(const ExperimentPreset& preset, const std::filesystem::path& root,
                           int jobs);

}  // namespace fanetids

#endif  // FANETIDS_PIPELINE_HPP_
