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

#ifndef FANETIDS_EVAL_HPP_
#define FANETIDS_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fanetids {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

// Labels and predictions are 0 (normal) / 1 (attack).
ConfusionCounts count_confusion(std::span<const int> predicted, std::span<const int> actual);

struct Metrics {
  double accuracy = 0.0;
  std::optional<double> dr;   // absent when there are no positives
  std::optional<double> fpr;  // absent when there are no negatives
};

// Throws std::invalid_argument on an empty count.
Metrics metrics(const ConfusionCounts& c);

struct CostInputs {
  std::int64_t n_clients = 0;
  std::int64_t n_features = 0;
  std::int64_t bytes_per_value = 4;
  std::int64_t periods = 0;
  std::int64_t n_weights = 0;
  std::int64_t epochs = 0;
  double per_byte_energy = 0.0;  // J/B
  double train_energy = 0.0;     // J
};

// Raw-feature upload of a centralized IDS: N * F * S * Periods bytes.
std::int64_t cost_central(const CostInputs& in);
// Weight exchange of a federated IDS: 2 * N * W * S * Epoch bytes.
std::int64_t cost_federated(const CostInputs& in);

struct Energy {
  double communication = 0.0;
  double total = 0.0;
};
// Per node: E_com = W * S * Epoch * per_byte_energy, E_total = E_t + E_com.
Energy energy(const CostInputs& in);
// Centralized per-node upload energy: F * S * Periods * per_byte_energy.
double central_upload_energy(const CostInputs& in);

// Final-epoch outcome of one IDS variant on one scenario.
struct RoundRow {
  int epoch = 0;
  std::string strategy;
  double acc = 0.0;
  std::optional<double> dr;
  std::optional<double> fpr;
  std::int64_t bytes_up = 0;
  std::int64_t bytes_down = 0;
};

// "epoch,strategy,acc,dr,fpr,bytes_up,bytes_down"; absent rates print empty.
void write_round_report(std::ostream& out, std::span<const RoundRow> rows);
std::vector<RoundRow> read_round_report(std::istream& in);

// Comparison over a results tree laid out as
//   <root>/<attack>/r<ratio percent>/s<seed>/<variant>.csv
// Each table cell is the mean over seeds of the variant's last report row.
struct ComparisonRow {
  std::string attack;
  int ratio_percent = 0;
  std::string variant;
  double acc = 0.0;
  std::optional<double> dr;
  std::optional<double> fpr;
  int seeds = 0;
};

std::vector<ComparisonRow> collect_comparison(const std::filesystem::path& root);

// Writes comparison.csv ("attack,ratio,variant,acc,dr,fpr"), btsc_delta.csv
// and curves/<attack>_r<ratio>_<variant>.csv ("epoch,acc", seed-averaged)
// into `out`. Pure function of the report files under `root`.
void emit_comparison(const std::filesystem::path& root, const std::filesystem::path& out);

void write_comparison(std::ostream& out, std::span<const ComparisonRow> rows);

}  // namespace fanetids

#endif  // FANETIDS_EVAL_HPP_
