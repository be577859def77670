#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "entrocf/nn/mlp.hpp"

namespace testing {

using entrocf::Matrix;
using entrocf::MlpModel;
using entrocf::Vector;

// Single-layer model logistic(w.x + b).
inline MlpModel linear_model(const Vector& w, double b) {
  Matrix wm = w;
  Vector bv(1);
  bv << b;
  return MlpModel({entrocf::DenseLayer{wm, bv}});
}

// Model whose output is `p` everywhere.
inline MlpModel constant_model(int d, double p) {
  return linear_model(Vector::Zero(d), std::log(p / (1.0 - p)));
}

inline Vector random_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(d);
  for (int j = 0; j < d; ++j) x(j) = u(rng);
  return x;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("entrocf_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
