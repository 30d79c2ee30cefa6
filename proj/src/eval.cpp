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

#include "fanetids/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "fanetids/common.hpp"

namespace fanetids {
namespace {

namespace fs = std::filesystem;

std::string opt_text(const std::optional<double>& v) { return v ? format_exact(*v) : std::string{}; }

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : std::string{}; }

std::optional<double> parse_opt(const std::string& s, int line) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw std::runtime_error("report line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

int variant_rank(const std::string& v) {
  if (v == "C") return 0;
  if (v == "L") return 1;
  if (v == "FL") return 2;
  return 3;
}

bool is_report_name(const std::string& stem) {
  return stem == "C" || stem == "L" || stem.rfind("FL", 0) == 0;
}

// Mean over the values present; absent when none is.
std::optional<double> mean_present(const std::vector<std::optional<double>>& vs) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : vs) {
    if (v) sum += *v, ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

struct CellKey {
  std::string attack;
  int ratio = 0;
  std::string variant;
  auto tie() const { return std::make_tuple(attack, ratio, variant_rank(variant), variant); }
  bool operator<(const CellKey& o) const { return tie() < o.tie(); }
};

struct Collected {
  std::map<CellKey, std::vector<std::vector<RoundRow>>> reports;  // one per seed
};

Collected collect(const fs::path& root) {
  Collected c;
  if (!fs::is_directory(root)) return c;
  std::vector<fs::path> attacks;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) attacks.push_back(e.path());
  }
  std::sort(attacks.begin(), attacks.end());
  for (const auto& attack_dir : attacks) {
    std::vector<fs::path> ratios;
    for (const auto& e : fs::directory_iterator(attack_dir)) {
      const auto name = e.path().filename().string();
      if (e.is_directory() && name.size() > 1 && name[0] == 'r') ratios.push_back(e.path());
    }
    std::sort(ratios.begin(), ratios.end());
    for (const auto& ratio_dir : ratios) {
      int pct = 0;
      const auto rname = ratio_dir.filename().string();
      auto r = std::from_chars(rname.data() + 1, rname.data() + rname.size(), pct);
      if (r.ec != std::errc{} || r.ptr != rname.data() + rname.size()) continue;
      std::vector<fs::path> seeds;
      for (const auto& e : fs::directory_iterator(ratio_dir)) {
        if (e.is_directory() && e.path().filename().string().rfind('s', 0) == 0) {
          seeds.push_back(e.path());
        }
      }
      std::sort(seeds.begin(), seeds.end());
      for (const auto& seed_dir : seeds) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(seed_dir)) {
          if (e.is_regular_file() && e.path().extension() == ".csv" &&
              is_report_name(e.path().stem().string())) {
            files.push_back(e.path());
          }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
          std::ifstream in(f);
          auto rows = read_round_report(in);
          if (rows.empty()) continue;
          CellKey key{attack_dir.filename().string(), pct, f.stem().string()};
          c.reports[key].push_back(std::move(rows));
        }
      }
    }
  }
  return c;
}

}  // namespace

ConfusionCounts count_confusion(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool a = actual[i] != 0;
    if (p && a) ++c.tp;
    if (p && !a) ++c.fp;
    if (!p && !a) ++c.tn;
    if (!p && a) ++c.fn;
  }
  return c;
}

Metrics metrics(const ConfusionCounts& c) {
  if (c.total() <= 0) throw std::invalid_argument("metrics of an empty evaluation");
  Metrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fn > 0) m.dr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (c.fp + c.tn > 0) m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  return m;
}

std::int64_t cost_central(const CostInputs& in) {
  return in.n_clients * in.n_features * in.bytes_per_value * in.periods;
}

std::int64_t cost_federated(const CostInputs& in) {
  return 2 * in.n_clients * in.n_weights * in.bytes_per_value * in.epochs;
}

Energy energy(const CostInputs& in) {
  Energy e;
  e.communication = static_cast<double>(in.n_weights * in.bytes_per_value * in.epochs) *
                    in.per_byte_energy;
  e.total = in.train_energy + e.communication;
  return e;
}

double central_upload_energy(const CostInputs& in) {
  return static_cast<double>(in.n_features * in.bytes_per_value * in.periods) * in.per_byte_energy;
}

void write_round_report(std::ostream& out, std::span<const RoundRow> rows) {
  out << "epoch,strategy,acc,dr,fpr,bytes_up,bytes_down\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.strategy << ',' << format_exact(r.acc) << ',' << opt_text(r.dr)
        << ',' << opt_text(r.fpr) << ',' << r.bytes_up << ',' << r.bytes_down << '\n';
  }
}

std::vector<RoundRow> read_round_report(std::istream& in) {
  std::vector<RoundRow> rows;
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || line != "epoch,strategy,acc,dr,fpr,bytes_up,bytes_down") {
    throw std::runtime_error("report: missing header");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (!line.empty() && line.back() == ',') cols.emplace_back();
    if (cols.size() != 7) {
      throw std::runtime_error("report line " + std::to_string(line_no) + ": expected 7 columns");
    }
    RoundRow r;
    r.epoch = std::stoi(cols[0]);
    r.strategy = cols[1];
    r.acc = parse_opt(cols[2], line_no).value_or(0.0);
    r.dr = parse_opt(cols[3], line_no);
    r.fpr = parse_opt(cols[4], line_no);
    r.bytes_up = std::stoll(cols[5]);
    r.bytes_down = std::stoll(cols[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ComparisonRow> collect_comparison(const std::filesystem::path& root) {
  const Collected c = collect(root);
  std::vector<ComparisonRow> out;
  for (const auto& [key, per_seed] : c.reports) {
    ComparisonRow row;
    row.attack = key.attack;
    row.ratio_percent = key.ratio;
    row.variant = key.variant;
    row.seeds = static_cast<int>(per_seed.size());
    std::vector<std::optional<double>> drs, fprs;
    for (const auto& rows : per_seed) {
      row.acc += rows.back().acc;
      drs.push_back(rows.back().dr);
      fprs.push_back(rows.back().fpr);
    }
    row.acc /= row.seeds;
    row.dr = mean_present(drs);
    row.fpr = mean_present(fprs);
    out.push_back(std::move(row));
  }
  return out;
}

void write_comparison(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << "attack,ratio,variant,acc,dr,fpr\n";
  char ratio[16];
  for (const auto& r : rows) {
    std::snprintf(ratio, sizeof ratio, "%.2f", r.ratio_percent / 100.0);
    out << r.attack << ',' << ratio << ',' << r.variant << ',' << fixed(r.acc) << ','
        << fixed(r.dr) << ',' << fixed(r.fpr) << '\n';
  }
}

void emit_comparison(const std::filesystem::path& root, const std::filesystem::path& out) {
  fs::create_directories(out / "curves");
  const auto rows = collect_comparison(root);
  {
    std::ofstream f(out / "comparison.csv");
    write_comparison(f, rows);
  }
  {
    std::ofstream f(out / "btsc_delta.csv");
    f << "attack,ratio,variant,acc,acc_btsc,delta\n";
    for (const auto& base : rows) {
      for (const auto& b : rows) {
        if (b.attack == base.attack && b.ratio_percent == base.ratio_percent &&
            b.variant == base.variant + "-BTSC") {
          char ratio[16];
          std::snprintf(ratio, sizeof ratio, "%.2f", base.ratio_percent / 100.0);
          f << base.attack << ',' << ratio << ',' << base.variant << ',' << fixed(base.acc) << ','
            << fixed(b.acc) << ',' << fixed(b.acc - base.acc) << '\n';
        }
      }
    }
  }
  const Collected c = collect(root);
  for (const auto& [key, per_seed] : c.reports) {
    std::map<int, std::pair<double, int>> by_epoch;
    for (const auto& rows : per_seed) {
      for (const auto& r : rows) {
        auto& slot = by_epoch[r.epoch];
        slot.first += r.acc;
        ++slot.second;
      }
    }
    std::ofstream f(out / "curves" /
                    (key.attack + "_r" + std::to_string(key.ratio) + "_" + key.variant + ".csv"));
    f << "epoch,acc\n";
    for (const auto& [epoch, acc] : by_epoch) {
      f << epoch << ',' << fixed(acc.first / acc.second) << '\n';
    }
  }
}

}  // namespace fanetids
