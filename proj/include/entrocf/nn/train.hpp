#pragma once

#include <cstdint>
#include <vector>

#include "entrocf/data/dataset.hpp"
#include "entrocf/nn/mlp.hpp"

namespace entrocf {

// Adam + binary cross-entropy. The learning rate and initialisation are
// project defaults, not tuned values.
struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::vector<int> hidden = {128, 128, 128};

  void validate() const;
};

// Deterministic in (data, cfg): initialisation and shuffling draw from
// streams derived from cfg.seed.
MlpModel train(const TabularDataset& data, const TrainConfig& cfg);

// Fraction of rows where (forward >= 0.5) == label.
double accuracy(const MlpModel& model, const TabularDataset& data);

// Mean binary cross-entropy.
double log_loss(const MlpModel& model, const TabularDataset& data);

}  // namespace entrocf
