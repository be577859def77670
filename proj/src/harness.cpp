#include "entrocf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "entrocf/errors.hpp"
#include "entrocf/seed.hpp"

namespace entrocf {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void SweepConfig::validate() const {
  if (theta_grid.empty() || tau_grid.empty()) throw ConfigError("theta and tau grids must be nonempty");
  for (double t : theta_grid) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("theta values must be positive");
  }
  for (double t : tau_grid) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw ConfigError("tau values must lie in (0, 1]; got " + format_number(t));
    }
  }
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end())) throw ConfigError("tau grid must be ascending");
  if (!(desk_scale > 0.0 && desk_scale <= 1.0)) throw ConfigError("desk_scale must lie in (0, 1]");
  if (max_instances < 0) throw ConfigError("max_instances must be nonnegative");
  if (workers < 0) throw ConfigError("workers must be nonnegative");
  RiskParams probe = risk;
  probe.theta = theta_grid.front();
  probe.tau = tau_grid.front();
  probe.validate();
  closest.validate();
  ensemble.train_cfg.validate();
  if (ensemble.n_models < 1) throw ConfigError("n_models must be >= 1");
  if (dataset != "synthetic") (void)dataset_info(dataset);
}

// ---------------------------------------------------------------- config I/O

nlohmann::json to_json(const SweepConfig& c) {
  const auto& t = c.ensemble.train_cfg;
  return {
      {"dataset", c.dataset},
      {"data_dir", c.data_dir.string()},
      {"ensemble_dir", c.ensemble_dir.string()},
      {"out_dir", c.out_dir.string()},
      {"seed", c.seed},
      {"desk_scale", c.desk_scale},
      {"theta_grid", c.theta_grid},
      {"tau_grid", c.tau_grid},
      {"ensemble",
       {{"n_models", c.ensemble.n_models},
        {"drop_k", c.ensemble.drop_k},
        {"shared_init", c.ensemble.shared_init},
        {"epochs", t.epochs},
        {"batch_size", t.batch_size},
        {"learning_rate", t.learning_rate},
        {"adam_beta1", t.adam_beta1},
        {"adam_beta2", t.adam_beta2},
        {"adam_epsilon", t.adam_epsilon},
        {"hidden", t.hidden}}},
      {"risk", {{"eta", c.risk.eta}, {"max_iter", c.risk.max_iter}}},
      {"closest",
       {{"norm_order", c.closest.norm_order},
        {"step", c.closest.step},
        {"step_decay", c.closest.step_decay},
        {"min_step", c.closest.min_step},
        {"l1_penalty", c.closest.l1_penalty},
        {"margin", c.closest.margin},
        {"max_iter", c.closest.max_iter},
        {"box_project", c.closest.box_project},
        {"coordinate_scan", c.closest.coordinate_scan}}},
      {"max_instances", c.max_instances},
      {"workers", c.workers},
      {"synthetic",
       {{"n", c.synthetic_n},
        {"separation", c.synthetic_separation},
        {"test_fraction", c.synthetic_test_fraction}}},
  };
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError("unknown config key '" + where + it.key() + "'");
    }
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

SweepConfig sweep_config_from_json(const nlohmann::json& j, SweepConfig c) {
  try {
    reject_unknown(j,
                   {"dataset", "data_dir", "ensemble_dir", "out_dir", "seed", "desk_scale",
                    "theta_grid", "tau_grid", "ensemble", "risk", "closest", "max_instances",
                    "workers", "synthetic"},
                   "");
    read(j, "dataset", c.dataset);
    if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
    if (j.contains("ensemble_dir")) c.ensemble_dir = j.at("ensemble_dir").get<std::string>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    read(j, "seed", c.seed);
    read(j, "desk_scale", c.desk_scale);
    read(j, "theta_grid", c.theta_grid);
    read(j, "tau_grid", c.tau_grid);
    read(j, "max_instances", c.max_instances);
    read(j, "workers", c.workers);
    if (j.contains("ensemble")) {
      const auto& e = j.at("ensemble");
      reject_unknown(e,
                     {"n_models", "drop_k", "shared_init", "epochs", "batch_size", "learning_rate",
                      "adam_beta1", "adam_beta2", "adam_epsilon", "hidden"},
                     "ensemble.");
      auto& t = c.ensemble.train_cfg;
      read(e, "n_models", c.ensemble.n_models);
      read(e, "drop_k", c.ensemble.drop_k);
      read(e, "shared_init", c.ensemble.shared_init);
      read(e, "epochs", t.epochs);
      read(e, "batch_size", t.batch_size);
      read(e, "learning_rate", t.learning_rate);
      read(e, "adam_beta1", t.adam_beta1);
      read(e, "adam_beta2", t.adam_beta2);
      read(e, "adam_epsilon", t.adam_epsilon);
      read(e, "hidden", t.hidden);
    }
    if (j.contains("risk")) {
      const auto& r = j.at("risk");
      reject_unknown(r, {"eta", "max_iter"}, "risk.");
      read(r, "eta", c.risk.eta);
      read(r, "max_iter", c.risk.max_iter);
    }
    if (j.contains("closest")) {
      const auto& r = j.at("closest");
      reject_unknown(r,
                     {"norm_order", "step", "step_decay", "min_step", "l1_penalty", "margin",
                      "max_iter", "box_project", "coordinate_scan"},
                     "closest.");
      read(r, "norm_order", c.closest.norm_order);
      read(r, "step", c.closest.step);
      read(r, "step_decay", c.closest.step_decay);
      read(r, "min_step", c.closest.min_step);
      read(r, "l1_penalty", c.closest.l1_penalty);
      read(r, "margin", c.closest.margin);
      read(r, "max_iter", c.closest.max_iter);
      read(r, "box_project", c.closest.box_project);
      read(r, "coordinate_scan", c.closest.coordinate_scan);
    }
    if (j.contains("synthetic")) {
      const auto& s = j.at("synthetic");
      reject_unknown(s, {"n", "separation", "test_fraction"}, "synthetic.");
      read(s, "n", c.synthetic_n);
      read(s, "separation", c.synthetic_separation);
      read(s, "test_fraction", c.synthetic_test_fraction);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& path, SweepConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + " byte " + std::to_string(e.byte), e.what());
  }
  return sweep_config_from_json(j, std::move(base));
}

SweepConfig paper_config(const std::string& dataset) {
  SweepConfig c;
  c.dataset = dataset;
  c.ensemble.n_models = 20;
  c.ensemble.train_cfg.epochs = 200;
  c.ensemble.train_cfg.batch_size = 32;
  c.theta_grid = {0.1, 1.0, 10.0};
  if (dataset == "synthetic") {
    // Small ensemble on the 2D blobs, used for the visual scenario.
    c.ensemble.n_models = 5;
    c.ensemble.drop_k = 150;
    c.ensemble.train_cfg.epochs = 100;
    c.theta_grid = {0.1};
    c.tau_grid = {0.4, 1.0};
    return c;
  }
  c.ensemble.drop_k = dataset_info(dataset).published_drop_k;
  if (dataset == "heloc") c.tau_grid = {0.1, 0.3, 0.5, 0.7, 1.0};
  if (dataset == "german") c.tau_grid = {0.3, 0.5, 0.7, 0.9, 1.0};
  if (dataset == "adult") c.tau_grid = {0.5, 0.7, 0.9, 1.0};
  return c;
}

SweepConfig desk_config(const std::string& dataset) {
  SweepConfig c = paper_config(dataset);
  if (dataset == "synthetic") return c;
  c.desk_scale = 0.1;
  c.ensemble.n_models = 8;
  // German keeps its full epoch count: at 10% it has 67 training rows and
  // 20 epochs leaves the members close to constant.
  c.ensemble.train_cfg.epochs = dataset == "german" ? 200 : 20;
  c.ensemble.drop_k = static_cast<int>(std::lround(c.ensemble.drop_k * c.desk_scale));
  return c;
}

// ----------------------------------------------------------------- preparing

PreparedData prepare_data(const SweepConfig& cfg) {
  if (cfg.dataset == "synthetic") {
    const auto all = synth_blobs(cfg.synthetic_n, cfg.synthetic_separation, cfg.seed);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(all.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(derive_seed(cfg.seed, SeedStream::kSplit));
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_test = std::clamp<Eigen::Index>(
        std::llround(cfg.synthetic_test_fraction * static_cast<double>(all.size())), 1,
        all.size() - 1);
    std::vector<Eigen::Index> test(order.begin(), order.begin() + n_test);
    std::vector<Eigen::Index> train(order.begin() + n_test, order.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    PreparedData out;
    out.train = all.subset(train);
    out.test = all.subset(test);
    out.test.split = SplitTag::kTest;
    return out;
  }
  const auto& info = dataset_info(cfg.dataset);
  const auto raw = load_csv(cfg.data_dir / info.file_name, info.schema);
  PrepConfig pc;
  pc.seed = cfg.seed;
  pc.test_fraction = info.test_fraction;
  pc.desk_scale = cfg.desk_scale;
  return preprocess(raw, pc);
}

PreparedExperiment prepare_experiment(const SweepConfig& cfg) {
  cfg.validate();
  auto data = prepare_data(cfg);
  if (!cfg.ensemble_dir.empty()) {
    auto ens = load_ensemble(cfg.ensemble_dir);
    if (ens.input_dim() != data.train.dim()) {
      throw ShapeError("loaded ensemble expects " + std::to_string(ens.input_dim()) +
                       " features, dataset has " + std::to_string(data.train.dim()));
    }
    return {std::move(data), std::move(ens)};
  }
  EnsembleBuildConfig ec = cfg.ensemble;
  ec.seed = cfg.seed;
  auto ens = build_ensemble(data.train, ec);
  return {std::move(data), std::move(ens)};
}

std::vector<Eigen::Index> rejected_instances(const TabularDataset& test, const MlpModel& reference,
                                             int max_instances) {
  std::vector<Eigen::Index> out;
  if (test.empty()) return out;
  const Vector p = reference.forward_batch(test.features);
  for (Eigen::Index r = 0; r < p.size(); ++r) {
    if (p(r) < 0.5) out.push_back(r);
    if (max_instances > 0 && static_cast<int>(out.size()) >= max_instances) break;
  }
  return out;
}

// ----------------------------------------------------------------- sweeping

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  unsigned w = workers > 0 ? static_cast<unsigned>(workers) : std::thread::hardware_concurrency();
  w = std::max(1u, std::min<unsigned>(w, static_cast<unsigned>(n)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

SweepCell aggregate(double theta, double tau, const std::vector<const InstanceRecord*>& records) {
  SweepCell c;
  c.theta = theta;
  c.tau = tau;
  std::vector<double> cost, validity;
  double wall = 0.0;
  for (const auto* r : records) {
    wall += r->result.wall_clock_ms;
    if (r->result.status == CfStatus::kValid) {
      ++c.n_valid;
      cost.push_back(r->result.cost_l1);
      validity.push_back(r->result.validity);
    } else {
      ++c.n_failed;
    }
  }
  c.mean_cost = mean_of(cost);
  c.std_cost = std_of(cost, c.mean_cost);
  c.mean_validity = mean_of(validity);
  c.std_validity = std_of(validity, c.mean_validity);
  c.mean_wall_clock_ms = records.empty() ? 0.0 : wall / static_cast<double>(records.size());
  return c;
}

GridOutcome evaluate_grid(const TabularDataset& test, const Ensemble& ens, const SweepConfig& cfg) {
  cfg.validate();
  GridOutcome out;
  out.instances = rejected_instances(test, ens.reference(), cfg.max_instances);
  const std::size_t n_cells = cfg.theta_grid.size() * cfg.tau_grid.size();
  out.records.resize(out.instances.size() * n_cells);

  parallel_for(out.instances.size(), cfg.workers, [&](std::size_t k) {
    const Eigen::Index id = out.instances[k];
    const Vector x = test.row(id);
    const auto t0 = std::chrono::steady_clock::now();
    const auto closest = closest_counterfactual(ens.reference(), x, cfg.closest);
    const double closest_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::size_t slot = k * n_cells;
    for (double theta : cfg.theta_grid) {
      for (double tau : cfg.tau_grid) {
        RiskParams p = cfg.risk;
        p.theta = theta;
        p.tau = tau;
        auto& rec = out.records[slot++];
        rec.instance_id = id;
        rec.theta = theta;
        rec.tau = tau;
        rec.result = repair_counterfactual(x, closest, ens, p, cfg.closest);
        rec.result.wall_clock_ms += closest_ms;
      }
    }
  });

  std::size_t cell = 0;
  for (double theta : cfg.theta_grid) {
    for (double tau : cfg.tau_grid) {
      std::vector<const InstanceRecord*> rs;
      rs.reserve(out.instances.size());
      for (std::size_t k = 0; k < out.instances.size(); ++k) rs.push_back(&out.records[k * n_cells + cell]);
      out.cells.push_back(aggregate(theta, tau, rs));
      ++cell;
    }
  }
  return out;
}

SweepRun run_sweep(const SweepConfig& cfg) {
  auto experiment = prepare_experiment(cfg);
  SweepRun run{std::move(experiment), {}, {}};
  for (const auto& m : run.experiment.ensemble.models()) {
    run.test_accuracies.push_back(accuracy(m, run.experiment.data.test));
  }
  run.outcome = evaluate_grid(run.experiment.data.test, run.experiment.ensemble, cfg);
  if (!cfg.out_dir.empty()) write_sweep_files(cfg.out_dir, cfg, run);
  return run;
}

std::vector<SizeStudyRow> ensemble_size_study(const TabularDataset& test, const Ensemble& pool,
                                              const SweepConfig& cfg, const std::vector<int>& sizes) {
  if (sizes.empty()) throw ConfigError("size study needs at least one ensemble size");
  std::vector<SizeStudyRow> rows;
  for (int n : sizes) {
    if (n < 1) throw ConfigError("ensemble sizes must be positive");
    if (n > pool.size()) {
      throw ConfigError("ensemble size " + std::to_string(n) + " exceeds the trained pool of " +
                        std::to_string(pool.size()));
    }
    const auto sub = pool.prefix(n);
    const auto outcome = evaluate_grid(test, sub, cfg);
    for (const auto& c : outcome.cells) rows.push_back({n, c});
  }
  return rows;
}

std::vector<SizeStudyRow> ensemble_size_study(const SweepConfig& cfg, const std::vector<int>& sizes) {
  if (sizes.empty()) throw ConfigError("size study needs at least one ensemble size");
  for (int n : sizes) {
    if (n < 1) throw ConfigError("ensemble sizes must be positive");
  }
  SweepConfig pool_cfg = cfg;
  pool_cfg.ensemble.n_models = std::max(cfg.ensemble.n_models, *std::max_element(sizes.begin(), sizes.end()));
  pool_cfg.ensemble.reference_pool = *std::min_element(sizes.begin(), sizes.end());
  if (!cfg.ensemble_dir.empty()) pool_cfg.ensemble.reference_pool = 0;
  auto ex = prepare_experiment(pool_cfg);
  auto rows = ensemble_size_study(ex.data.test, ex.ensemble, cfg, sizes);
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    write_size_study(cfg.out_dir / "size_study.csv", rows);
  }
  return rows;
}

std::map<double, std::vector<CurvePoint>> emit_tradeoff_curve(const std::vector<SweepCell>& cells) {
  if (cells.empty()) throw ConfigError("cannot emit a trade-off curve from an empty sweep");
  std::map<double, std::vector<CurvePoint>> series;
  for (const auto& c : cells) series[c.theta].push_back({c.tau, c.mean_cost, c.mean_validity});
  for (auto& [theta, pts] : series) {
    std::stable_sort(pts.begin(), pts.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.tau < b.tau; });
  }
  return series;
}

// ------------------------------------------------------------------- output

nlohmann::json to_json(const CounterfactualResult& r) {
  return {{"x_prime", std::vector<double>(r.x_prime.data(), r.x_prime.data() + r.x_prime.size())},
          {"closest", std::vector<double>(r.closest.data(), r.closest.data() + r.closest.size())},
          {"cost_l1", r.cost_l1},
          {"risk_value", r.risk_value},
          {"validity", r.validity},
          {"reference_valid", r.reference_valid},
          {"iterations", r.iterations},
          {"closest_iterations", r.closest_iterations},
          {"status", to_string(r.status)},
          {"wall_clock_ms", r.wall_clock_ms}};
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

std::string theta_tag(double theta) {
  // 0.1 -> "0.1", 10 -> "10"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", theta);
  return buf;
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_sweep_files(const std::filesystem::path& dir, const SweepConfig& cfg, const SweepRun& run) {
  std::filesystem::create_directories(dir);
  const auto& cells = run.outcome.cells;
  const auto& F = format_number;

  {
    auto out = open_out(dir / "sweep.csv");
    out << "theta,tau,mean_cost,std_cost,mean_validity,std_validity,n_valid,n_failed\n";
    for (const auto& c : cells) {
      out << F(c.theta) << ',' << F(c.tau) << ',' << F(c.mean_cost) << ',' << F(c.std_cost) << ','
          << F(c.mean_validity) << ',' << F(c.std_validity) << ',' << c.n_valid << ','
          << c.n_failed << '\n';
    }
  }
  {
    auto out = open_out(dir / "timings.csv");
    out << "theta,tau,mean_wall_clock_ms\n";
    for (const auto& c : cells) out << F(c.theta) << ',' << F(c.tau) << ',' << F(c.mean_wall_clock_ms) << '\n';
  }
  {
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& c : cells) {
      jc.push_back({{"theta", c.theta},
                    {"tau", c.tau},
                    {"mean_cost", c.mean_cost},
                    {"std_cost", c.std_cost},
                    {"mean_validity", c.mean_validity},
                    {"std_validity", c.std_validity},
                    {"n_valid", c.n_valid},
                    {"n_failed", c.n_failed}});
    }
    auto out = open_out(dir / "sweep.json");
    out << nlohmann::json{{"schema", kOutputSchema}, {"config", to_json(cfg)}, {"cells", jc}}.dump(2)
        << '\n';
  }
  for (const auto& [theta, pts] : emit_tradeoff_curve(cells)) {
    auto out = open_out(dir / ("curve_" + theta_tag(theta) + ".csv"));
    out << "tau,mean_cost,mean_validity\n";
    for (const auto& p : pts) out << F(p.tau) << ',' << F(p.mean_cost) << ',' << F(p.mean_validity) << '\n';
  }
  {
    auto jsonl = open_out(dir / "results.jsonl");
    auto csv = open_out(dir / "results.csv");
    csv << "instance_id,theta,tau,eta,max_iter,seed,status,cost_l1,risk_value,validity,"
           "reference_valid,iterations,closest_iterations\n";
    for (const auto& r : run.outcome.records) {
      auto j = to_json(r.result);
      j["instance_id"] = r.instance_id;
      j["theta"] = r.theta;
      j["tau"] = r.tau;
      j["eta"] = cfg.risk.eta;
      j["max_iter"] = cfg.risk.max_iter;
      j["seed"] = cfg.seed;
      jsonl << j.dump() << '\n';
      const auto& x = r.result;
      csv << r.instance_id << ',' << F(r.theta) << ',' << F(r.tau) << ',' << F(cfg.risk.eta) << ','
          << cfg.risk.max_iter << ',' << cfg.seed << ',' << to_string(x.status) << ','
          << F(x.cost_l1) << ',' << F(x.risk_value) << ',' << F(x.validity) << ','
          << (x.reference_valid ? 1 : 0) << ',' << x.iterations << ',' << x.closest_iterations << '\n';
    }
  }
  {
    nlohmann::json timings = nlohmann::json::array();
    for (const auto& c : cells) {
      timings.push_back({{"theta", c.theta}, {"tau", c.tau}, {"mean_wall_clock_ms", c.mean_wall_clock_ms}});
    }
    const auto& d = run.experiment.data;
    const nlohmann::json meta = {
        {"schema", kOutputSchema},
        {"created_utc", now_utc()},
        {"seed", cfg.seed},
        {"ensemble_seed", run.experiment.ensemble.seed()},
        {"reference_index", run.experiment.ensemble.reference_index()},
        {"dataset", cfg.dataset},
        {"train_rows", d.train.size()},
        {"test_rows", d.test.size()},
        {"features", d.train.dim()},
        {"rejected_instances", run.outcome.instances.size()},
        {"test_accuracies", run.test_accuracies},
        {"warnings", d.warnings},
        {"timings", timings}};
    auto out = open_out(dir / "meta.json");
    out << meta.dump(2) << '\n';
  }
}

void write_size_study(const std::filesystem::path& path, const std::vector<SizeStudyRow>& rows) {
  auto out = open_out(path);
  const auto& F = format_number;
  out << "n_models,theta,tau,mean_cost,std_cost,mean_validity,std_validity,n_valid,n_failed\n";
  for (const auto& r : rows) {
    const auto& c = r.cell;
    out << r.n_models << ',' << F(c.theta) << ',' << F(c.tau) << ',' << F(c.mean_cost) << ','
        << F(c.std_cost) << ',' << F(c.mean_validity) << ',' << F(c.std_validity) << ','
        << c.n_valid << ',' << c.n_failed << '\n';
  }
}

}  // namespace entrocf
