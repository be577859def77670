#include "entrocf/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "entrocf/errors.hpp"
#include "entrocf/seed.hpp"

namespace entrocf {

namespace {

void check_weights(const std::vector<double>& w, std::size_t n) {
  if (w.size() != n) throw ShapeError("ensemble weights must have one entry per model");
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("ensemble weights must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("ensemble weights must sum to 1");
}

}  // namespace

Ensemble::Ensemble(std::vector<MlpModel> models, int reference_index, std::uint64_t seed)
    : Ensemble(std::move(models), reference_index, {}, seed) {}

Ensemble::Ensemble(std::vector<MlpModel> models, int reference_index,
                   std::vector<double> weights, std::uint64_t seed)
    : reference_index_(reference_index), weights_(std::move(weights)), seed_(seed) {
  if (models.empty()) throw ConfigError("an ensemble needs at least one model");
  const int d = models.front().input_dim();
  for (const auto& m : models) {
    if (m.input_dim() != d) throw ShapeError("ensemble members disagree on input_dim");
  }
  if (reference_index < 0 || reference_index >= static_cast<int>(models.size())) {
    throw ConfigError("reference_index out of range");
  }
  if (weights_.empty()) {
    weights_.assign(models.size(), 1.0 / static_cast<double>(models.size()));
  }
  check_weights(weights_, models.size());
  models_ = std::make_shared<const std::vector<MlpModel>>(std::move(models));
}

std::vector<double> Ensemble::outputs(const Vector& x) const {
  std::vector<double> out;
  out.reserve(models_->size());
  for (const auto& m : *models_) out.push_back(m.forward(x));
  return out;
}

double Ensemble::validity(const Vector& x) const {
  int accepted = 0;
  for (const auto& m : *models_) {
    if (m.forward(x) >= 0.5) ++accepted;
  }
  return static_cast<double>(accepted) / static_cast<double>(models_->size());
}

Ensemble Ensemble::prefix(int n) const {
  if (n < 1 || n > size()) {
    throw ConfigError("sub-ensemble size " + std::to_string(n) + " exceeds pool of " +
                      std::to_string(size()));
  }
  if (reference_index_ >= n) {
    throw ConfigError("sub-ensemble of size " + std::to_string(n) +
                      " would exclude the reference model");
  }
  std::vector<MlpModel> head(models_->begin(), models_->begin() + n);
  return Ensemble(std::move(head), reference_index_, seed_);
}

Ensemble Ensemble::with_reference(int reference_index) const {
  if (reference_index < 0 || reference_index >= size()) {
    throw ConfigError("reference_index out of range");
  }
  Ensemble copy = *this;
  copy.reference_index_ = reference_index;
  return copy;
}

Ensemble build_ensemble(const TabularDataset& train_split, const EnsembleBuildConfig& cfg) {
  if (cfg.n_models < 1) throw ConfigError("n_models must be >= 1");
  if (cfg.drop_k < 0) throw ConfigError("drop_k must be nonnegative");
  if (cfg.drop_k >= train_split.size()) {
    throw ConfigError("drop_k (" + std::to_string(cfg.drop_k) +
                      ") must be smaller than the training split (" +
                      std::to_string(train_split.size()) + ")");
  }
  if (cfg.reference_pool < 0 || cfg.reference_pool > cfg.n_models) {
    throw ConfigError("reference_pool must lie in [0, n_models]");
  }
  cfg.train_cfg.validate();

  const auto n = static_cast<std::size_t>(train_split.size());
  std::vector<MlpModel> models;
  models.reserve(static_cast<std::size_t>(cfg.n_models));
  for (int i = 0; i < cfg.n_models; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    std::vector<Eigen::Index> rows(n);
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    if (cfg.drop_k > 0) {
      std::mt19937_64 rng(derive_seed(cfg.seed, SeedStream::kDrop, idx));
      // Partial Fisher-Yates: the first drop_k positions become the dropped rows.
      for (std::size_t j = 0; j < static_cast<std::size_t>(cfg.drop_k); ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, n - 1);
        std::swap(rows[j], rows[pick(rng)]);
      }
      rows.erase(rows.begin(), rows.begin() + cfg.drop_k);
      std::sort(rows.begin(), rows.end());
    }
    TrainConfig tc = cfg.train_cfg;
    if (!cfg.shared_init) tc.seed = derive_seed(cfg.seed, SeedStream::kInit, idx);
    models.push_back(train(train_split.subset(rows), tc));
  }

  const int pool = cfg.reference_pool == 0 ? cfg.n_models : cfg.reference_pool;
  std::mt19937_64 ref_rng(derive_seed(cfg.seed, SeedStream::kReference));
  std::uniform_int_distribution<int> pick_ref(0, pool - 1);
  const int reference = pick_ref(ref_rng);
  return Ensemble(std::move(models), reference, cfg.seed);
}

namespace {

std::string model_file_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "model_%03d.json", i);
  return buf;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + " byte " + std::to_string(e.byte), e.what());
  }
}

}  // namespace

void save_ensemble(const Ensemble& ens, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  for (int i = 0; i < ens.size(); ++i) {
    const auto name = model_file_name(i);
    save_model(ens.model(i), dir / name);
    files.push_back(name);
  }
  const nlohmann::json manifest = {{"schema", kEnsembleSchema},
                                   {"seed", ens.seed()},
                                   {"reference_index", ens.reference_index()},
                                   {"weights", ens.weights()},
                                   {"models", files}};
  std::ofstream out(dir / "ensemble.json");
  if (!out) throw ConfigError("cannot write " + (dir / "ensemble.json").string());
  out << manifest.dump(2) << '\n';
}

Ensemble load_ensemble(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "ensemble.json";
  const auto j = read_json(manifest_path);
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != kEnsembleSchema) {
    throw VersionError(manifest_path.string() + ": schema tag is " +
                       (j.is_object() && j.contains("schema") ? j.at("schema").dump() : "missing") +
                       ", expected \"" + kEnsembleSchema + "\"");
  }
  try {
    std::vector<MlpModel> models;
    for (const auto& f : j.at("models")) {
      models.push_back(load_model(dir / f.get<std::string>()));
    }
    return Ensemble(std::move(models), j.at("reference_index").get<int>(),
                    j.at("weights").get<std::vector<double>>(),
                    j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest_path.string(), e.what());
  }
}

}  // namespace entrocf
