#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "entrocf/data/dataset.hpp"
#include "entrocf/nn/mlp.hpp"
#include "entrocf/nn/train.hpp"

namespace entrocf {

// Ordered set of models sharing one input dimension, a distinguished
// reference model, and a probability vector over the members.
class Ensemble {
 public:
  // Uniform weights.
  Ensemble(std::vector<MlpModel> models, int reference_index, std::uint64_t seed = 0);
  Ensemble(std::vector<MlpModel> models, int reference_index, std::vector<double> weights,
           std::uint64_t seed = 0);

  int size() const { return static_cast<int>(models_->size()); }
  int input_dim() const { return models_->front().input_dim(); }
  int reference_index() const { return reference_index_; }
  const MlpModel& reference() const { return (*models_)[static_cast<std::size_t>(reference_index_)]; }
  const MlpModel& model(int i) const { return models_->at(static_cast<std::size_t>(i)); }
  const std::vector<MlpModel>& models() const { return *models_; }
  const std::vector<double>& weights() const { return weights_; }
  std::uint64_t seed() const { return seed_; }

  // Member outputs m_i(x), in member order.
  std::vector<double> outputs(const Vector& x) const;

  // (1/N) * #{i : m_i(x) >= 0.5}.
  double validity(const Vector& x) const;

  // The first `n` members with uniform weights and the same reference model.
  // Throws ConfigError if n exceeds the ensemble or excludes the reference.
  Ensemble prefix(int n) const;

  // Same members, another reference model.
  Ensemble with_reference(int reference_index) const;

 private:
  // Members are immutable and shared between views such as prefix().
  std::shared_ptr<const std::vector<MlpModel>> models_;
  int reference_index_ = 0;
  std::vector<double> weights_;
  std::uint64_t seed_ = 0;
};

struct EnsembleBuildConfig {
  int n_models = 20;
  int drop_k = 0;
  std::uint64_t seed = 0;
  TrainConfig train_cfg;
  // All members start from train_cfg.seed instead of per-member seeds.
  bool shared_init = false;
  // Reference model is drawn uniformly from the first `reference_pool`
  // members (0 = all). Sub-ensemble studies use this so every prefix
  // contains the reference.
  int reference_pool = 0;
};

// Member i is trained on the split minus drop_k rows drawn without
// replacement from stream (seed, i). Subsets of different members may
// overlap.
Ensemble build_ensemble(const TabularDataset& train_split, const EnsembleBuildConfig& cfg);

// Writes <dir>/ensemble.json and <dir>/model_XXX.json.
void save_ensemble(const Ensemble& ens, const std::filesystem::path& dir);
Ensemble load_ensemble(const std::filesystem::path& dir);

inline constexpr const char* kEnsembleSchema = "entrocf.ensemble/1";

}  // namespace entrocf
