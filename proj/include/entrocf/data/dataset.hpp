#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace entrocf {

enum class SplitTag { kTrain, kTest };

const char* to_string(SplitTag tag);

// Per-column min-max statistics; x_norm = (x - min) / (max - min).
struct ColumnRange {
  double min = 0.0;
  double max = 1.0;
};

// Normalised feature matrix (rows are instances) with binary labels.
struct TabularDataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::vector<ColumnRange> normalization;
  SplitTag split = SplitTag::kTrain;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  bool empty() const { return features.rows() == 0; }

  Eigen::VectorXd row(Eigen::Index i) const { return features.row(i).transpose(); }

  // Rows selected by index, in the given order.
  TabularDataset subset(const std::vector<Eigen::Index>& rows) const;
};

}  // namespace entrocf
