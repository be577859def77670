#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "entrocf/counterfactual.hpp"
#include "entrocf/data/pipeline.hpp"
#include "entrocf/ensemble.hpp"

namespace entrocf {

// Everything needed to reproduce one experiment.
struct SweepConfig {
  std::string dataset = "synthetic";  // german | adult | heloc | synthetic
  std::filesystem::path data_dir = "data";
  std::filesystem::path ensemble_dir;  // load instead of training when set
  std::filesystem::path out_dir;       // no files written when empty
  std::uint64_t seed = 0;
  double desk_scale = 1.0;
  std::vector<double> theta_grid = {0.1, 1.0, 10.0};
  std::vector<double> tau_grid = {0.1, 0.3, 0.5, 0.7, 1.0};
  EnsembleBuildConfig ensemble;
  RiskParams risk;  // theta and tau are taken from the grids
  ClosestCfConfig closest;
  int max_instances = 0;  // cap on rejected test instances, 0 = all
  int workers = 0;        // 0 = hardware concurrency
  int synthetic_n = 400;
  double synthetic_separation = 0.3;
  double synthetic_test_fraction = 0.25;

  void validate() const;
};

nlohmann::json to_json(const SweepConfig& cfg);
// Keys not present keep their defaults; unknown keys are rejected and the
// result is validated.
SweepConfig sweep_config_from_json(const nlohmann::json& j, SweepConfig base = {});
SweepConfig load_sweep_config(const std::filesystem::path& path, SweepConfig base = {});

// Published settings: N = 20, 200 epochs, batch 32, dataset-specific k and grids.
SweepConfig paper_config(const std::string& dataset);
// Desk scale: 10% of each split, N = 8, 20 epochs (200 for German), k scaled
// by the same factor.
SweepConfig desk_config(const std::string& dataset);

struct PreparedExperiment {
  PreparedData data;
  Ensemble ensemble;
};

// Loads or synthesises the data and builds (or loads) the ensemble.
PreparedExperiment prepare_experiment(const SweepConfig& cfg);
PreparedData prepare_data(const SweepConfig& cfg);

// Test rows rejected by the reference model, in row order, capped at
// max_instances (0 = no cap).
std::vector<Eigen::Index> rejected_instances(const TabularDataset& test, const MlpModel& reference,
                                             int max_instances = 0);

struct InstanceRecord {
  Eigen::Index instance_id = 0;
  double theta = 0.0;
  double tau = 0.0;
  CounterfactualResult result;
};

struct SweepCell {
  double theta = 0.0;
  double tau = 0.0;
  double mean_cost = 0.0;
  double std_cost = 0.0;
  double mean_validity = 0.0;
  double std_validity = 0.0;
  int n_valid = 0;
  int n_failed = 0;
  double mean_wall_clock_ms = 0.0;
};

struct GridOutcome {
  std::vector<SweepCell> cells;        // theta-major, tau-minor
  std::vector<InstanceRecord> records;  // instance-major, then cells
  std::vector<Eigen::Index> instances;
};

// Runs every (theta, tau) cell on the rejected test instances. The closest
// counterfactual of an instance does not depend on (theta, tau); it is
// computed once and its time is added to each cell's wall clock.
GridOutcome evaluate_grid(const TabularDataset& test, const Ensemble& ens, const SweepConfig& cfg);

// Means and (population) standard deviations over Valid records only;
// wall clock over all records.
SweepCell aggregate(double theta, double tau, const std::vector<const InstanceRecord*>& records);

struct SweepRun {
  PreparedExperiment experiment;
  GridOutcome outcome;
  std::vector<double> test_accuracies;
};

// Full sweep; writes sweep.csv, sweep.json, curve_<theta>.csv, results.jsonl,
// results.csv, timings.csv and meta.json when cfg.out_dir is set.
SweepRun run_sweep(const SweepConfig& cfg);

struct SizeStudyRow {
  int n_models = 0;
  SweepCell cell;
};

// Cells for each prefix sub-ensemble of a pool of max(sizes) models. The
// reference model is drawn from the first min(sizes) members so every
// prefix shares it.
std::vector<SizeStudyRow> ensemble_size_study(const SweepConfig& cfg, const std::vector<int>& sizes);
std::vector<SizeStudyRow> ensemble_size_study(const TabularDataset& test, const Ensemble& pool,
                                              const SweepConfig& cfg, const std::vector<int>& sizes);

struct CurvePoint {
  double tau = 0.0;
  double mean_cost = 0.0;
  double mean_validity = 0.0;
};

// One series per theta, points in ascending tau.
std::map<double, std::vector<CurvePoint>> emit_tradeoff_curve(const std::vector<SweepCell>& cells);

// Output helpers.
std::string format_number(double v);  // 17 significant digits
void write_sweep_files(const std::filesystem::path& dir, const SweepConfig& cfg, const SweepRun& run);
void write_size_study(const std::filesystem::path& path, const std::vector<SizeStudyRow>& rows);
nlohmann::json to_json(const CounterfactualResult& r);

inline constexpr const char* kOutputSchema = "entrocf.sweep/1";

}  // namespace entrocf
