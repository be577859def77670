#include "entrocf/nn/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "entrocf/errors.hpp"

namespace entrocf {

double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) {
    throw ShapeError("model needs at least one layer");
  }
  input_dim_ = static_cast<int>(layers_.front().fan_in());
  if (input_dim_ <= 0) {
    throw ShapeError("model input dimension must be positive");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.biases.size() != l.fan_out()) {
      throw ShapeError("layer " + std::to_string(i) + ": bias length " +
                       std::to_string(l.biases.size()) + " != fan_out " +
                       std::to_string(l.fan_out()));
    }
    if (i + 1 < layers_.size() && l.fan_out() != layers_[i + 1].fan_in()) {
      throw ShapeError("layer " + std::to_string(i) +
                       " does not chain into layer " + std::to_string(i + 1));
    }
  }
  if (layers_.back().fan_out() != 1) {
    throw ShapeError("final layer must have a single output unit");
  }
}

namespace {

std::vector<DenseLayer> shaped_layers(int input_dim, std::span<const int> hidden) {
  if (input_dim <= 0) throw ShapeError("input_dim must be positive");
  std::vector<DenseLayer> layers;
  int fan_in = input_dim;
  auto add = [&](int fan_out) {
    if (fan_out <= 0) throw ShapeError("layer width must be positive");
    layers.push_back({Matrix::Zero(fan_in, fan_out), Vector::Zero(fan_out)});
    fan_in = fan_out;
  };
  for (int h : hidden) add(h);
  add(1);
  return layers;
}

}  // namespace

MlpModel MlpModel::zeros(int input_dim, std::span<const int> hidden) {
  return MlpModel(shaped_layers(input_dim, hidden));
}

MlpModel MlpModel::random(int input_dim, std::span<const int> hidden,
                          std::uint64_t seed) {
  auto layers = shaped_layers(input_dim, hidden);
  std::mt19937_64 rng(seed);
  for (auto& l : layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.fan_in()));
    std::uniform_real_distribution<double> u(-bound, bound);
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r) l.weights(r, c) = u(rng);
    for (Eigen::Index r = 0; r < l.biases.size(); ++r) l.biases(r) = u(rng);
  }
  return MlpModel(std::move(layers));
}

void MlpModel::check_input(Eigen::Index n) const {
  if (layers_.empty()) throw ShapeError("model is empty");
  if (n != input_dim_) {
    throw ShapeError("input has length " + std::to_string(n) + ", model expects " +
                     std::to_string(input_dim_));
  }
}

double MlpModel::logit(const Vector& x) const {
  check_input(x.size());
  Vector h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Vector z = layers_[i].weights.transpose() * h + layers_[i].biases;
    if (i + 1 < layers_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h(0);
}

double MlpModel::forward(const Vector& x) const { return logistic(logit(x)); }

MlpModel::Evaluation MlpModel::evaluate(const Vector& x) const {
  check_input(x.size());
  // Keep pre-activations for the backward pass.
  std::vector<Vector> pre;
  pre.reserve(layers_.size());
  Vector h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    pre.push_back(layers_[i].weights.transpose() * h + layers_[i].biases);
    if (i + 1 < layers_.size()) {
      h = pre.back().cwiseMax(0.0);
    }
  }
  Evaluation ev;
  ev.logit = pre.back()(0);
  ev.probability = logistic(ev.logit);

  Vector delta = Vector::Ones(1);
  for (std::size_t i = layers_.size(); i-- > 0;) {
    Vector g = layers_[i].weights * delta;
    if (i > 0) {
      const Vector& z = pre[i - 1];
      for (Eigen::Index k = 0; k < g.size(); ++k) {
        if (!(z(k) > 0.0)) g(k) = 0.0;
      }
    }
    delta = std::move(g);
  }
  ev.logit_gradient = std::move(delta);
  return ev;
}

Vector MlpModel::logit_gradient(const Vector& x) const {
  return evaluate(x).logit_gradient;
}

Vector MlpModel::input_gradient(const Vector& x) const {
  auto ev = evaluate(x);
  const double p = ev.probability;
  return (p * (1.0 - p)) * ev.logit_gradient;
}

Vector MlpModel::forward_batch(const Matrix& x) const {
  check_input(x.cols());
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = h * layers_[i].weights;
    z.rowwise() += layers_[i].biases.transpose();
    if (i + 1 < layers_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  Vector out(h.rows());
  for (Eigen::Index r = 0; r < h.rows(); ++r) out(r) = logistic(h(r, 0));
  return out;
}

bool MlpModel::operator==(const MlpModel& other) const {
  if (input_dim_ != other.input_dim_ || layers_.size() != other.layers_.size())
    return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols())
      return false;
    if (a.weights != b.weights || a.biases != b.biases) return false;
  }
  return true;
}

nlohmann::json to_json(const MlpModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    layers.push_back({{"rows", l.weights.rows()},
                      {"cols", l.weights.cols()},
                      {"weights", w},
                      {"biases", std::vector<double>(l.biases.data(),
                                                     l.biases.data() + l.biases.size())}});
  }
  return {{"schema", kModelSchema},
          {"input_dim", model.input_dim()},
          {"hidden_activation", "relu"},
          {"output_activation", "logistic"},
          {"layers", std::move(layers)}};
}

MlpModel model_from_json(const nlohmann::json& j) {
  try {
    if (!j.contains("schema") || j.at("schema") != kModelSchema) {
      throw VersionError("model schema tag is " +
                         (j.contains("schema") ? j.at("schema").dump() : "missing") +
                         ", expected \"" + kModelSchema + "\"");
    }
    if (j.at("hidden_activation") != "relu" || j.at("output_activation") != "logistic") {
      throw ParseError("model", "unsupported activation tags");
    }
    std::vector<DenseLayer> layers;
    const auto& jl = j.at("layers");
    for (std::size_t i = 0; i < jl.size(); ++i) {
      const auto& e = jl.at(i);
      const auto rows = e.at("rows").get<Eigen::Index>();
      const auto cols = e.at("cols").get<Eigen::Index>();
      const auto w = e.at("weights").get<std::vector<double>>();
      const auto b = e.at("biases").get<std::vector<double>>();
      if (rows <= 0 || cols <= 0 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(b.size()) != cols) {
        throw ParseError("layers[" + std::to_string(i) + "]",
                         "weight/bias sizes do not match rows x cols");
      }
      DenseLayer l{Matrix(rows, cols), Vector(cols)};
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
          l.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      for (Eigen::Index c = 0; c < cols; ++c) l.biases(c) = b[static_cast<std::size_t>(c)];
      layers.push_back(std::move(l));
    }
    MlpModel m(std::move(layers));
    if (m.input_dim() != j.at("input_dim").get<int>()) {
      throw ParseError("input_dim", "does not match first layer rows");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model", e.what());
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json(model).dump() << '\n';
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + " byte " + std::to_string(e.byte), e.what());
  }
  return model_from_json(j);
}

}  // namespace entrocf
