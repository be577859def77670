#include "entrocf/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "entrocf/errors.hpp"
#include "entrocf/seed.hpp"

namespace entrocf {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in (0, 1)");
  if (!(adam_beta2 > 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in (0, 1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
}

namespace {

struct AdamSlot {
  Matrix m_w, v_w;
  Vector m_b, v_b;
};

void check_labels(const TabularDataset& data) {
  if (static_cast<Eigen::Index>(data.labels.size()) != data.size()) {
    throw ShapeError("label count does not match row count");
  }
  for (int y : data.labels) {
    if (y != 0 && y != 1) throw ConfigError("labels must be binary (0/1)");
  }
}

}  // namespace

MlpModel train(const TabularDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw ConfigError("cannot train on an empty split");
  check_labels(data);

  MlpModel model = MlpModel::random(static_cast<int>(data.dim()), cfg.hidden,
                                    derive_seed(cfg.seed, SeedStream::kInit));
  auto& layers = model.mutable_layers();
  const std::size_t depth = layers.size();

  std::vector<AdamSlot> slots(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    slots[i].m_w = Matrix::Zero(layers[i].fan_in(), layers[i].fan_out());
    slots[i].v_w = slots[i].m_w;
    slots[i].m_b = Vector::Zero(layers[i].fan_out());
    slots[i].v_b = slots[i].m_b;
  }

  const Eigen::Index n = data.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, SeedStream::kShuffle));

  std::vector<Matrix> pre(depth), act(depth);
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Matrix xb(b, data.dim());
      Vector yb(b);
      for (Eigen::Index r = 0; r < b; ++r) {
        const auto idx = order[static_cast<std::size_t>(start + r)];
        xb.row(r) = data.features.row(idx);
        yb(r) = data.labels[static_cast<std::size_t>(idx)];
      }

      // forward
      const Matrix* h = &xb;
      for (std::size_t i = 0; i < depth; ++i) {
        pre[i] = (*h) * layers[i].weights;
        pre[i].rowwise() += layers[i].biases.transpose();
        act[i] = (i + 1 < depth) ? Matrix(pre[i].cwiseMax(0.0)) : pre[i];
        h = &act[i];
      }

      // d(mean BCE)/d logit = (p - y) / b
      Matrix delta(b, 1);
      for (Eigen::Index r = 0; r < b; ++r) {
        delta(r, 0) = (logistic(pre[depth - 1](r, 0)) - yb(r)) / static_cast<double>(b);
      }

      ++step;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
      const double lr = cfg.learning_rate;
      const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2, eps = cfg.adam_epsilon;

      for (std::size_t i = depth; i-- > 0;) {
        const Matrix& input = (i == 0) ? xb : act[i - 1];
        Matrix grad_w = input.transpose() * delta;
        Vector grad_b = delta.colwise().sum().transpose();
        Matrix next;
        if (i > 0) {
          next = delta * layers[i].weights.transpose();
          next = next.cwiseProduct((pre[i - 1].array() > 0.0).cast<double>().matrix());
        }

        auto& s = slots[i];
        s.m_w = b1 * s.m_w + (1.0 - b1) * grad_w;
        s.v_w = b2 * s.v_w + (1.0 - b2) * grad_w.cwiseAbs2();
        s.m_b = b1 * s.m_b + (1.0 - b1) * grad_b;
        s.v_b = b2 * s.v_b + (1.0 - b2) * grad_b.cwiseAbs2();
        layers[i].weights.array() -=
            lr * (s.m_w.array() / bc1) / ((s.v_w.array() / bc2).sqrt() + eps);
        layers[i].biases.array() -=
            lr * (s.m_b.array() / bc1) / ((s.v_b.array() / bc2).sqrt() + eps);

        if (i > 0) delta = std::move(next);
      }
    }
  }
  return model;
}

double accuracy(const MlpModel& model, const TabularDataset& data) {
  if (data.empty()) throw ConfigError("accuracy of an empty split is undefined");
  check_labels(data);
  const Vector p = model.forward_batch(data.features);
  Eigen::Index hits = 0;
  for (Eigen::Index r = 0; r < p.size(); ++r) {
    const int predicted = p(r) >= 0.5 ? 1 : 0;
    if (predicted == data.labels[static_cast<std::size_t>(r)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(p.size());
}

double log_loss(const MlpModel& model, const TabularDataset& data) {
  if (data.empty()) throw ConfigError("log loss of an empty split is undefined");
  const Vector p = model.forward_batch(data.features);
  double total = 0.0;
  for (Eigen::Index r = 0; r < p.size(); ++r) {
    const double q = std::clamp(p(r), 1e-15, 1.0 - 1e-15);
    total -= data.labels[static_cast<std::size_t>(r)] == 1 ? std::log(q) : std::log(1.0 - q);
  }
  return total / static_cast<double>(p.size());
}

}  // namespace entrocf
