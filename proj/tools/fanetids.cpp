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

// fanetids: simulate, extract, train, evaluate, reproduce.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "fanetids/dataset.hpp"
#include "fanetids/eval.hpp"
#include "fanetids/pipeline.hpp"
#include "fanetids/scenario_config.hpp"
#include "fanetids/sim.hpp"

namespace fs = std::filesystem;
using namespace fanetids;

namespace {

fs::path default_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FANETIDS_OUT"); env != nullptr && *env != '\0') return env;
  return "fanetids-out";
}

std::vector<int> parse_hidden(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw ConfigError("hidden", "expected comma-separated sizes, got '" + text + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FANET intrusion-detection simulator and trainer"};
  // Global options may also follow the subcommand.
  app.fallthrough();
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string out_flag;
  int jobs = 1;
  app.add_option("--seed", seed, "Override the seed");
  app.add_option("--out", out_flag, "Output directory (default: $FANETIDS_OUT or ./fanetids-out)");
  app.add_option("--jobs", jobs, "Parallel workers for reproduce")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "Run one scenario and write its logs");
  std::string config_path;
  bool trace = false;
  sim->add_option("config", config_path, "Scenario config file")->required();
  sim->add_flag("--trace", trace, "Also write the global event trace");

  auto* ext = app.add_subcommand("extract", "Turn scenario logs into a dataset");
  std::string logs_dir, dataset_out, scenario_id;
  ext->add_option("logs", logs_dir, "Directory written by simulate")->required();
  ext->add_option("-o,--output", dataset_out, "Dataset file (default: <out>/dataset.csv)");
  ext->add_option("--scenario-id", scenario_id, "Scenario id column (default: logs dir name)");

  auto* tr = app.add_subcommand("train", "Train one IDS variant on a dataset");
  std::string dataset_path, variant_text = "fl", strategy_text, arch_text = "cnn",
                            hidden_text = "16,8";
  TrainOptions topt;
  tr->add_option("dataset", dataset_path, "Dataset file")->required();
  tr->add_option("--variant", variant_text, "c, l or fl");
  auto* strategy_opt = tr->add_option("--strategy", strategy_text, "fedavg, fedprox or fedsgd");
  auto* btsc_opt = tr->add_flag("--btsc", topt.btsc, "Aggregate only the top clients");
  auto* frac_opt = tr->add_option("--btsc-fraction", topt.btsc_fraction, "Share of clients kept");
  auto* mu_opt = tr->add_option("--mu", topt.mu, "FedProx proximal coefficient");
  auto* part_opt =
      tr->add_option("--participation", topt.participation, "Per-round client show-up probability");
  tr->add_option("--arch", arch_text, "cnn or dnn");
  tr->add_option("--hidden", hidden_text, "Hidden layer sizes");
  tr->add_option("--global-epochs", topt.global_epochs, "Training epochs / federation rounds");

  auto* ev = app.add_subcommand("evaluate", "Build comparison tables from a results tree");
  std::string results_root;
  ev->add_option("results", results_root, "Results root (default: <out>)");

  auto* rep = app.add_subcommand("reproduce", "Run an experiment preset end to end");
  std::string preset_name;
  bool list = false;
  rep->add_option("preset", preset_name, "Preset name");
  rep->add_flag("--list", list, "List presets");

  CLI11_PARSE(app, argc, argv);
  const fs::path out = default_out(out_flag);

  try {
    if (sim->parsed()) {
      ScenarioConfig cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      validate(cfg);
      const auto result = run_scenario(cfg, trace);
      write_scenario(result, out);
      std::cout << "wrote " << result.node_logs.size() << " node logs to " << out.string() << '\n';
    } else if (ext->parsed()) {
      const fs::path dir(logs_dir);
      const std::string id =
          scenario_id.empty() ? fs::absolute(dir).lexically_normal().filename().string() : scenario_id;
      const auto windows = extract_scenario_dir(dir, id.empty() ? "scenario" : id);
      const fs::path target = dataset_out.empty() ? out / "dataset.csv" : fs::path(dataset_out);
      if (target.has_parent_path()) fs::create_directories(target.parent_path());
      write_dataset(target, windows);
      std::cout << "wrote " << windows.size() << " windows to " << target.string() << '\n';
    } else if (tr->parsed()) {
      auto v = parse_variant(variant_text);
      if (!v) throw ConfigError("variant", "expected c, l or fl");
      topt.variant = *v;
      if (*v != Variant::kFederated) {
        for (auto* o : {strategy_opt, btsc_opt, frac_opt, mu_opt, part_opt}) {
          if (o->count() > 0) throw ConfigError(o->get_name(), "only applies to --variant fl");
        }
      }
      if (!strategy_text.empty()) {
        auto s = parse_strategy(strategy_text);
        if (!s) throw ConfigError("strategy", "expected fedavg, fedprox or fedsgd");
        topt.strategy = *s;
      }
      if (mu_opt->count() > 0 && topt.strategy.value_or(Strategy::kFedAvg) != Strategy::kFedProx) {
        throw ConfigError("mu", "only applies to --strategy fedprox");
      }
      if (arch_text == "cnn") {
        topt.arch = ArchKind::kCnn;
      } else if (arch_text == "dnn") {
        topt.arch = ArchKind::kDnn;
      } else {
        throw ConfigError("arch", "expected cnn or dnn");
      }
      topt.hidden = parse_hidden(hidden_text);
      if (seed) topt.seed = *seed;
      topt.validate();
      const auto windows = read_dataset(fs::path(dataset_path));
      const auto res = train_dataset(windows, topt, out);
      for (const auto& n : res.notes) std::cerr << "note: " << n << '\n';
      if (!res.report.empty()) {
        const auto& last = res.report.back();
        std::cout << topt.label() << " acc=" << last.acc;
        if (last.dr) std::cout << " dr=" << *last.dr;
        if (last.fpr) std::cout << " fpr=" << *last.fpr;
        std::cout << '\n';
      }
    } else if (ev->parsed()) {
      const fs::path root = results_root.empty() ? out : fs::path(results_root);
      if (!fs::is_directory(root)) throw ConfigError("results", "no such directory " + root.string());
      emit_comparison(root, out);
      const auto rows = collect_comparison(root);
      write_comparison(std::cout, rows);
    } else if (rep->parsed()) {
      if (list || preset_name.empty()) {
        for (const auto& n : preset_names()) std::cout << n << '\n';
        return preset_name.empty() && !list ? 2 : 0;
      }
      auto preset = find_preset(preset_name);
      if (seed) preset.base.seed = *seed;
      const auto summary = reproduce(preset, out, jobs);
      std::cout << summary.completed.size() << " cell(s) completed\n";
      for (const auto& f : summary.failed) std::cerr << "failed: " << f << '\n';
      std::ifstream table(out / "comparison.csv");
      std::cout << table.rdbuf();
      return summary.failed.empty() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: invalid " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
