#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace entrocf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One affine layer. `weights` is fan_in x fan_out, so the layer maps
// h -> weights^T h + biases.
struct DenseLayer {
  Matrix weights;
  Vector biases;

  Eigen::Index fan_in() const { return weights.rows(); }
  Eigen::Index fan_out() const { return weights.cols(); }
};

// Feed-forward binary classifier: ReLU hidden layers, logistic output.
class MlpModel {
 public:
  MlpModel() = default;
  // Throws ShapeError unless the layers chain and end in a single unit.
  explicit MlpModel(std::vector<DenseLayer> layers);

  // Zero-initialised network with the given hidden widths.
  static MlpModel zeros(int input_dim, std::span<const int> hidden);
  // Uniform fan-in scaled initialisation, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static MlpModel random(int input_dim, std::span<const int> hidden,
                         std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  // Pre-sigmoid output.
  double logit(const Vector& x) const;
  // Probability in (0, 1).
  double forward(const Vector& x) const;
  // d forward / d x. ReLU'(0) is taken to be 0.
  Vector input_gradient(const Vector& x) const;
  // d logit / d x, same convention.
  Vector logit_gradient(const Vector& x) const;

  struct Evaluation {
    double logit = 0.0;
    double probability = 0.5;
    Vector logit_gradient;
  };
  // Logit, probability and logit gradient from a single forward/backward pass.
  Evaluation evaluate(const Vector& x) const;

  // Batched probabilities for the rows of `x` (n x d).
  Vector forward_batch(const Matrix& x) const;

  bool operator==(const MlpModel& other) const;

 private:
  void check_input(Eigen::Index n) const;

  int input_dim_ = 0;
  std::vector<DenseLayer> layers_;
};

double logistic(double z);

// JSON model file. Doubles are written with round-trip precision.
nlohmann::json to_json(const MlpModel& model);
MlpModel model_from_json(const nlohmann::json& j);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

inline constexpr const char* kModelSchema = "entrocf.mlp/1";

}  // namespace entrocf
