// entrocf command line: data preparation, ensemble training, single
// counterfactuals, sweeps, size studies and the risk property suite.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "entrocf/counterfactual.hpp"
#include "entrocf/data/pipeline.hpp"
#include "entrocf/ensemble.hpp"
#include "entrocf/errors.hpp"
#include "entrocf/harness.hpp"
#include "entrocf/risk.hpp"

namespace {

using namespace entrocf;
using nlohmann::json;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_dir;
  std::optional<double> desk_scale;
  std::string paper_preset;
  std::string desk_preset;
  std::string dataset;
  std::string data_dir;
  std::string ensemble_dir;
  std::optional<int> max_instances;
  std::optional<int> workers;
};

SweepConfig resolve_config(const GlobalOptions& g) {
  if (!g.paper_preset.empty() && !g.desk_preset.empty()) {
    throw ConfigError("--paper-config and --desk-config are mutually exclusive");
  }
  SweepConfig cfg;
  if (!g.paper_preset.empty()) cfg = paper_config(g.paper_preset);
  if (!g.desk_preset.empty()) cfg = desk_config(g.desk_preset);
  if (!g.config_path.empty()) cfg = load_sweep_config(g.config_path, cfg);
  if (!g.dataset.empty()) cfg.dataset = g.dataset;
  if (!g.data_dir.empty()) cfg.data_dir = g.data_dir;
  if (!g.ensemble_dir.empty()) cfg.ensemble_dir = g.ensemble_dir;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  if (g.seed) cfg.seed = *g.seed;
  if (g.desk_scale) cfg.desk_scale = *g.desk_scale;
  if (g.max_instances) cfg.max_instances = *g.max_instances;
  if (g.workers) cfg.workers = *g.workers;
  cfg.validate();
  return cfg;
}

void require_out(const SweepConfig& cfg, const char* command) {
  if (cfg.out_dir.empty()) throw ConfigError(std::string(command) + " needs --out");
}

int cmd_prepare_data(const SweepConfig& cfg) {
  require_out(cfg, "prepare-data");
  const auto data = prepare_data(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<std::string> notes = data.warnings;
  notes.push_back("seed=" + std::to_string(cfg.seed));
  notes.push_back("desk_scale=" + format_number(cfg.desk_scale));
  save_dataset(data.train, cfg.out_dir / "train", notes);
  save_dataset(data.test, cfg.out_dir / "test", notes);
  std::cout << json{{"dataset", cfg.dataset},
                    {"train_rows", data.train.size()},
                    {"test_rows", data.test.size()},
                    {"features", data.train.dim()},
                    {"warnings", data.warnings}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_train_ensemble(SweepConfig cfg) {
  require_out(cfg, "train-ensemble");
  cfg.ensemble_dir.clear();
  const auto ex = prepare_experiment(cfg);
  save_ensemble(ex.ensemble, cfg.out_dir);
  std::vector<double> acc;
  for (const auto& m : ex.ensemble.models()) acc.push_back(accuracy(m, ex.data.test));
  std::cout << json{{"n_models", ex.ensemble.size()},
                    {"reference_index", ex.ensemble.reference_index()},
                    {"test_accuracies", acc}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_generate(const SweepConfig& cfg, double theta, double tau, int instance) {
  RiskParams p = cfg.risk;
  p.theta = theta;
  p.tau = tau;
  p.validate();
  const auto ex = prepare_experiment(cfg);
  const auto rejected = rejected_instances(ex.data.test, ex.ensemble.reference());
  if (rejected.empty()) throw ConfigError("the reference model rejects no test instance");
  if (instance < 0 || instance >= static_cast<int>(rejected.size())) {
    throw ConfigError("--instance must lie in [0, " + std::to_string(rejected.size()) + ")");
  }
  const auto row = rejected[static_cast<std::size_t>(instance)];
  const auto r = entropic_counterfactual(ex.data.test.row(row), ex.ensemble, p, cfg.closest);
  auto j = to_json(r);
  j["instance_id"] = row;
  j["theta"] = theta;
  j["tau"] = tau;
  j["eta"] = p.eta;
  j["max_iter"] = p.max_iter;
  j["seed"] = cfg.seed;
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_sweep(const SweepConfig& cfg) {
  const auto run = run_sweep(cfg);
  json cells = json::array();
  for (const auto& c : run.outcome.cells) {
    cells.push_back({{"theta", c.theta},
                     {"tau", c.tau},
                     {"mean_cost", c.mean_cost},
                     {"mean_validity", c.mean_validity},
                     {"n_valid", c.n_valid},
                     {"n_failed", c.n_failed}});
  }
  std::cout << json{{"instances", run.outcome.instances.size()}, {"cells", cells}}.dump() << '\n';
  return 0;
}

int cmd_size_study(const SweepConfig& cfg, const std::vector<int>& sizes) {
  const auto rows = ensemble_size_study(cfg, sizes);
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"n_models", r.n_models},
                   {"theta", r.cell.theta},
                   {"tau", r.cell.tau},
                   {"mean_cost", r.cell.mean_cost},
                   {"mean_validity", r.cell.mean_validity}});
  }
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_verify(std::uint64_t seed, int trials) {
  const auto checks = verify_risk_properties(seed, trials);
  bool ok = true;
  json out = json::array();
  for (const auto& c : checks) {
    ok = ok && c.passed;
    out.push_back({{"name", c.name}, {"passed", c.passed}, {"worst", c.worst}, {"detail", c.detail}});
  }
  std::cout << json{{"passed", ok}, {"checks", out}}.dump(2) << '\n';
  return ok ? 0 : 1;
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactuals that stay valid across a model ensemble"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--config", g.config_path, "JSON sweep config");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--desk-scale", g.desk_scale, "fraction of each split to keep");
  app.add_option("--paper-config", g.paper_preset, "published settings for a dataset");
  app.add_option("--desk-config", g.desk_preset, "reduced settings for a dataset");
  app.add_option("--dataset", g.dataset, "german | adult | heloc | synthetic");
  app.add_option("--data-dir", g.data_dir, "directory holding the raw data files");
  app.add_option("--ensemble", g.ensemble_dir, "load a saved ensemble instead of training");
  app.add_option("--max-instances", g.max_instances, "cap on rejected test instances");
  app.add_option("--workers", g.workers, "worker threads (0 = all cores)");

  auto* prep = app.add_subcommand("prepare-data", "split, encode and normalise a dataset");
  auto* trainc = app.add_subcommand("train-ensemble", "train and save an ensemble");
  auto* gen = app.add_subcommand("generate", "one counterfactual for a rejected test instance");
  double theta = 1.0, tau = 0.5;
  int instance = 0;
  gen->add_option("--theta", theta, "risk aversion")->required();
  gen->add_option("--tau", tau, "risk threshold")->required();
  gen->add_option("--instance", instance, "index into the rejected test instances");
  auto* sweep = app.add_subcommand("sweep", "run the (theta, tau) grid");
  auto* size = app.add_subcommand("size-study", "cells for sub-ensembles of several sizes");
  std::vector<int> sizes = {10, 20};
  size->add_option("--sizes", sizes, "ensemble sizes")->delimiter(',');
  auto* verify = app.add_subcommand("verify", "randomised checks of the risk measure");
  int trials = 1000;
  verify->add_option("--trials", trials, "samples per property");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage_error", e.what());
    return 2;
  }

  try {
    if (*verify) return cmd_verify(g.seed.value_or(0), trials);
    const auto cfg = resolve_config(g);
    if (*prep) return cmd_prepare_data(cfg);
    if (*trainc) return cmd_train_ensemble(cfg);
    if (*gen) return cmd_generate(cfg, theta, tau, instance);
    if (*sweep) return cmd_sweep(cfg);
    if (*size) return cmd_size_study(cfg, sizes);
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what());
    return 1;
  }
  return 0;
}
