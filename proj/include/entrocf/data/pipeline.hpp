#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "entrocf/data/dataset.hpp"

namespace entrocf {

enum class ColumnKind { kNumeric, kCategorical, kLabel, kIgnore };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
};

struct CsvSchema {
  std::string name;
  std::vector<ColumnSpec> columns;
  // ' ' means "split on runs of whitespace".
  char delimiter = ',';
  // With a header, columns are matched by name; without one, by position.
  bool has_header = true;
  std::vector<std::string> positive_labels;
  std::vector<std::string> negative_labels;
  // Rows holding any of these tokens are dropped.
  std::vector<std::string> missing_tokens = {"?"};
};

// Feature columns of a loaded file, in schema order (label and ignored columns
// excluded).
struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<double> numbers;       // kNumeric
  std::vector<std::string> strings;  // kCategorical
};

struct RawTable {
  std::string source;
  std::vector<RawColumn> columns;
  std::vector<std::string> labels;
  std::vector<std::string> positive_labels;
  std::vector<std::string> negative_labels;
  std::size_t dropped_rows = 0;  // rows with missing values

  std::size_t rows() const { return labels.size(); }
  std::size_t feature_count() const { return columns.size(); }
};

// Throws ParseError with "<path>:<line>" locations.
RawTable load_csv(const std::filesystem::path& path, const CsvSchema& schema);
RawTable parse_csv(std::string_view text, const CsvSchema& schema, std::string source = "<memory>");

struct PrepConfig {
  std::uint64_t seed = 0;
  double test_fraction = 0.25;
  // Fraction of each split kept after the split (1 = full scale).
  double desk_scale = 1.0;
};

struct PreparedData {
  TabularDataset train;
  TabularDataset test;
  std::vector<std::string> warnings;
};

// Label mapping, seeded train/test split, optional subsampling, one-hot
// encoding of categoricals, and min-max scaling with training statistics.
// Test rows are clipped into [0, 1]. Columns that are constant on the
// training split are dropped with a warning.
PreparedData preprocess(const RawTable& raw, const PrepConfig& cfg);

std::vector<ColumnRange> fit_ranges(const Eigen::MatrixXd& x);
Eigen::MatrixXd apply_ranges(const Eigen::MatrixXd& x, const std::vector<ColumnRange>& ranges,
                             bool clip);
Eigen::MatrixXd invert_ranges(const Eigen::MatrixXd& x, const std::vector<ColumnRange>& ranges);

// Two Gaussian blobs (std 0.08) centred symmetrically about (0.5, 0.5) along
// the diagonal, `separation` apart, clipped to [0, 1]^2. Row i has label i % 2.
TabularDataset synth_blobs(int n, double separation, std::uint64_t seed);

// Built-in dataset descriptions.
struct DatasetInfo {
  std::string id;
  std::string file_name;
  CsvSchema schema;
  double test_fraction = 0.25;
  // Published experiment settings.
  int published_drop_k = 0;
};

const DatasetInfo& german_dataset();
const DatasetInfo& adult_dataset();
const DatasetInfo& heloc_dataset();
// Throws ConfigError for unknown ids. "synthetic" is not a file dataset.
const DatasetInfo& dataset_info(const std::string& id);

// Dataset cache: <stem>.csv plus a <stem>.json sidecar.
void save_dataset(const TabularDataset& ds, const std::filesystem::path& stem,
                  const std::vector<std::string>& notes = {});
TabularDataset load_dataset(const std::filesystem::path& stem);

inline constexpr const char* kDatasetSchema = "entrocf.dataset/1";

}  // namespace entrocf
