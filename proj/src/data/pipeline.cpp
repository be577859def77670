#include "entrocf/data/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "entrocf/errors.hpp"
#include "entrocf/seed.hpp"

namespace entrocf {

const char* to_string(SplitTag tag) { return tag == SplitTag::kTrain ? "train" : "test"; }

TabularDataset TabularDataset::subset(const std::vector<Eigen::Index>& rows) const {
  TabularDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.labels.push_back(labels.at(static_cast<std::size_t>(rows[i])));
  }
  out.feature_names = feature_names;
  out.normalization = normalization;
  out.split = split;
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_line(std::string_view line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      out.emplace_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(const std::string& s, double& v) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && ptr == e && std::isfinite(v);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

RawTable parse_csv(std::string_view text, const CsvSchema& schema, std::string source) {
  if (schema.columns.empty()) throw ConfigError("schema has no columns");
  const auto label_count = std::count_if(schema.columns.begin(), schema.columns.end(),
                                         [](const auto& c) { return c.kind == ColumnKind::kLabel; });
  if (label_count != 1) throw ConfigError("schema must have exactly one label column");

  RawTable table;
  table.source = source;
  table.positive_labels = schema.positive_labels;
  table.negative_labels = schema.negative_labels;

  // Position of each schema column in the file.
  std::vector<std::size_t> position(schema.columns.size());
  std::iota(position.begin(), position.end(), std::size_t{0});
  std::size_t expected_fields = schema.columns.size();

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = !schema.has_header;
  bool any_line = false;

  for (const auto& c : schema.columns) {
    if (c.kind == ColumnKind::kNumeric || c.kind == ColumnKind::kCategorical) {
      table.columns.push_back({c.name, c.kind, {}, {}});
    }
  }

  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (nl >= text.size()) break;
      continue;
    }
    any_line = true;
    const std::string where = source + ":" + std::to_string(line_no);
    auto fields = split_line(line, schema.delimiter);

    if (!header_seen) {
      header_seen = true;
      expected_fields = fields.size();
      for (std::size_t i = 0; i < schema.columns.size(); ++i) {
        const auto it = std::find(fields.begin(), fields.end(), schema.columns[i].name);
        if (it == fields.end()) {
          throw ParseError(where, "missing column '" + schema.columns[i].name + "' in header");
        }
        position[i] = static_cast<std::size_t>(it - fields.begin());
      }
      continue;
    }
    if (fields.size() != expected_fields) {
      throw ParseError(where, "expected " + std::to_string(expected_fields) + " fields, found " +
                                  std::to_string(fields.size()));
    }
    bool missing = false;
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
      if (schema.columns[i].kind != ColumnKind::kIgnore &&
          contains(schema.missing_tokens, fields[position[i]])) {
        missing = true;
      }
    }
    if (missing) {
      ++table.dropped_rows;
      continue;
    }
    std::size_t feature = 0;
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
      const auto& spec = schema.columns[i];
      const auto& cell = fields[position[i]];
      switch (spec.kind) {
        case ColumnKind::kNumeric: {
          double v = 0.0;
          if (!parse_double(cell, v)) {
            throw ParseError(where + " column '" + spec.name + "'",
                             "cannot parse '" + cell + "' as a number");
          }
          table.columns[feature++].numbers.push_back(v);
          break;
        }
        case ColumnKind::kCategorical:
          table.columns[feature++].strings.push_back(cell);
          break;
        case ColumnKind::kLabel:
          table.labels.push_back(cell);
          break;
        case ColumnKind::kIgnore:
          break;
      }
    }
  }
  if (!any_line) throw ParseError(source, "file is empty");
  if (table.rows() == 0) throw ParseError(source, "no data rows");
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, path.string());
}

std::vector<ColumnRange> fit_ranges(const Eigen::MatrixXd& x) {
  std::vector<ColumnRange> r(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    r[static_cast<std::size_t>(c)] = {x.col(c).minCoeff(), x.col(c).maxCoeff()};
  }
  return r;
}

Eigen::MatrixXd apply_ranges(const Eigen::MatrixXd& x, const std::vector<ColumnRange>& ranges,
                             bool clip) {
  if (static_cast<std::size_t>(x.cols()) != ranges.size()) throw ShapeError("range count mismatch");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const auto& r = ranges[static_cast<std::size_t>(c)];
    const double span = r.max - r.min;
    if (!(span > 0.0)) throw ParameterError("degenerate column range");
    out.col(c) = (x.col(c).array() - r.min) / span;
    if (clip) out.col(c) = out.col(c).cwiseMax(0.0).cwiseMin(1.0);
  }
  return out;
}

Eigen::MatrixXd invert_ranges(const Eigen::MatrixXd& x, const std::vector<ColumnRange>& ranges) {
  if (static_cast<std::size_t>(x.cols()) != ranges.size()) throw ShapeError("range count mismatch");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const auto& r = ranges[static_cast<std::size_t>(c)];
    out.col(c) = x.col(c).array() * (r.max - r.min) + r.min;
  }
  return out;
}

namespace {

std::vector<int> map_labels(const RawTable& raw) {
  std::vector<int> y;
  y.reserve(raw.rows());
  if (raw.positive_labels.empty() && raw.negative_labels.empty()) {
    for (const auto& l : raw.labels) {
      if (l == "1") y.push_back(1);
      else if (l == "0") y.push_back(0);
      else throw ConfigError("label column is not binary: found '" + l + "'");
    }
    return y;
  }
  for (const auto& l : raw.labels) {
    if (contains(raw.positive_labels, l)) y.push_back(1);
    else if (contains(raw.negative_labels, l)) y.push_back(0);
    else throw ConfigError("label column is not binary: found '" + l + "'");
  }
  return y;
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

std::vector<std::size_t> keep_fraction(std::vector<std::size_t> rows, double fraction,
                                       std::uint64_t seed) {
  if (fraction >= 1.0) return rows;
  const auto keep = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size()))));
  if (keep >= rows.size()) return rows;
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(keep);
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

PreparedData preprocess(const RawTable& raw, const PrepConfig& cfg) {
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (!(cfg.desk_scale > 0.0 && cfg.desk_scale <= 1.0)) {
    throw ConfigError("desk_scale must lie in (0, 1]");
  }
  const std::size_t n = raw.rows();
  if (n < 2) throw ConfigError("need at least two rows to split");
  const auto labels = map_labels(raw);

  // Encode every row first; vocabularies come from the whole file.
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> encoded_cols;
  for (const auto& col : raw.columns) {
    if (col.kind == ColumnKind::kNumeric) {
      names.push_back(col.name);
      encoded_cols.push_back(Eigen::Map<const Eigen::VectorXd>(col.numbers.data(),
                                                               static_cast<Eigen::Index>(n)));
    } else {
      const std::set<std::string> vocab(col.strings.begin(), col.strings.end());
      for (const auto& v : vocab) {
        Eigen::VectorXd e(static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < n; ++r) e(static_cast<Eigen::Index>(r)) = col.strings[r] == v;
        names.push_back(col.name + "=" + v);
        encoded_cols.push_back(std::move(e));
      }
    }
  }
  Eigen::MatrixXd all(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(encoded_cols.size()));
  for (std::size_t c = 0; c < encoded_cols.size(); ++c) all.col(static_cast<Eigen::Index>(c)) = encoded_cols[c];

  const auto order = shuffled(n, derive_seed(cfg.seed, SeedStream::kSplit));
  auto n_test = static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  train_rows = keep_fraction(std::move(train_rows), cfg.desk_scale,
                             derive_seed(cfg.seed, SeedStream::kSubsample, 0));
  test_rows = keep_fraction(std::move(test_rows), cfg.desk_scale,
                            derive_seed(cfg.seed, SeedStream::kSubsample, 1));

  auto gather = [&](const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), all.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = all.row(static_cast<Eigen::Index>(rows[i]));
    return m;
  };
  Eigen::MatrixXd xtr = gather(train_rows);
  Eigen::MatrixXd xte = gather(test_rows);

  PreparedData out;
  if (raw.dropped_rows > 0) {
    out.warnings.push_back("dropped " + std::to_string(raw.dropped_rows) +
                           " rows with missing values from " + raw.source);
  }
  const auto ranges = fit_ranges(xtr);
  std::vector<Eigen::Index> kept;
  std::vector<ColumnRange> kept_ranges;
  std::vector<std::string> kept_names;
  for (std::size_t c = 0; c < ranges.size(); ++c) {
    if (ranges[c].max > ranges[c].min) {
      kept.push_back(static_cast<Eigen::Index>(c));
      kept_ranges.push_back(ranges[c]);
      kept_names.push_back(names[c]);
    } else {
      out.warnings.push_back("dropped constant column '" + names[c] + "'");
    }
  }
  if (kept.empty()) throw ConfigError("every feature column is constant on the training split");

  auto select = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd s(m.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) s.col(static_cast<Eigen::Index>(i)) = m.col(kept[i]);
    return s;
  };
  auto make = [&](const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows, SplitTag tag,
                  bool clip) {
    TabularDataset ds;
    ds.features = apply_ranges(select(m), kept_ranges, clip);
    ds.labels.reserve(rows.size());
    for (auto r : rows) ds.labels.push_back(labels[r]);
    ds.feature_names = kept_names;
    ds.normalization = kept_ranges;
    ds.split = tag;
    return ds;
  };
  out.train = make(xtr, train_rows, SplitTag::kTrain, false);
  out.test = make(xte, test_rows, SplitTag::kTest, true);
  return out;
}

TabularDataset synth_blobs(int n, double separation, std::uint64_t seed) {
  if (n < 4) throw ConfigError("synth_blobs needs n >= 4");
  constexpr double kStd = 0.08;
  std::mt19937_64 rng(derive_seed(seed, SeedStream::kSynthetic));
  std::normal_distribution<double> noise(0.0, kStd);
  const double offset = separation / (2.0 * std::sqrt(2.0));
  TabularDataset ds;
  ds.features.resize(n, 2);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const double c = label == 1 ? 0.5 + offset : 0.5 - offset;
    ds.features(i, 0) = std::clamp(c + noise(rng), 0.0, 1.0);
    ds.features(i, 1) = std::clamp(c + noise(rng), 0.0, 1.0);
    ds.labels[static_cast<std::size_t>(i)] = label;
  }
  ds.feature_names = {"x0", "x1"};
  ds.normalization = {{0.0, 1.0}, {0.0, 1.0}};
  return ds;
}

namespace {

CsvSchema make_german_schema() {
  using K = ColumnKind;
  CsvSchema s;
  s.name = "german";
  s.delimiter = ' ';
  s.has_header = false;
  s.columns = {{"status", K::kCategorical},
               {"duration", K::kNumeric},
               {"credit_history", K::kCategorical},
               {"purpose", K::kCategorical},
               {"credit_amount", K::kNumeric},
               {"savings", K::kCategorical},
               {"present_employment", K::kCategorical},
               {"installment_rate", K::kNumeric},
               {"status_sex", K::kCategorical},
               {"other_debtors", K::kCategorical},
               {"present_residence_since", K::kNumeric},
               {"property", K::kCategorical},
               {"age", K::kNumeric},
               {"installment_plans", K::kCategorical},
               {"housing", K::kCategorical},
               {"number_of_existing_credits", K::kNumeric},
               {"job", K::kCategorical},
               {"number_of_people_liable_for", K::kNumeric},
               {"telephone", K::kCategorical},
               {"foreign_worker", K::kCategorical},
               {"credit", K::kLabel}};
  s.positive_labels = {"1"};  // good credit risk
  s.negative_labels = {"2"};
  s.missing_tokens = {};
  return s;
}

CsvSchema make_adult_schema() {
  using K = ColumnKind;
  CsvSchema s;
  s.name = "adult";
  s.delimiter = ',';
  s.has_header = false;
  s.columns = {{"age", K::kNumeric},
               {"workclass", K::kCategorical},
               {"fnlwgt", K::kNumeric},
               {"education", K::kCategorical},
               {"education_num", K::kNumeric},
               {"marital_status", K::kCategorical},
               {"occupation", K::kCategorical},
               {"relationship", K::kCategorical},
               {"race", K::kCategorical},
               {"sex", K::kCategorical},
               {"capital_gain", K::kNumeric},
               {"capital_loss", K::kNumeric},
               {"hours_per_week", K::kNumeric},
               {"native_country", K::kCategorical},
               {"income", K::kLabel}};
  s.positive_labels = {">50K", ">50K."};
  s.negative_labels = {"<=50K", "<=50K."};
  s.missing_tokens = {"?"};
  return s;
}

CsvSchema make_heloc_schema() {
  CsvSchema s;
  s.name = "heloc";
  s.delimiter = ',';
  s.has_header = true;
  s.columns.push_back({"RiskPerformance", ColumnKind::kLabel});
  for (const char* name :
       {"ExternalRiskEstimate", "MSinceOldestTradeOpen", "MSinceMostRecentTradeOpen",
        "AverageMInFile", "NumSatisfactoryTrades", "NumTrades60Ever2DerogPubRec",
        "NumTrades90Ever2DerogPubRec", "PercentTradesNeverDelq", "MSinceMostRecentDelq",
        "MaxDelq2PublicRecLast12M", "MaxDelqEver", "NumTotalTrades", "NumTradesOpeninLast12M",
        "PercentInstallTrades", "MSinceMostRecentInqexcl7days", "NumInqLast6M",
        "NumInqLast6Mexcl7days", "NetFractionRevolvingBurden", "NetFractionInstallBurden",
        "NumRevolvingTradesWBalance", "NumInstallTradesWBalance",
        "NumBank2NatlTradesWHighUtilization", "PercentTradesWBalance"}) {
    s.columns.push_back({name, ColumnKind::kNumeric});
  }
  s.positive_labels = {"Good"};
  s.negative_labels = {"Bad"};
  s.missing_tokens = {""};
  return s;
}

}  // namespace

const DatasetInfo& german_dataset() {
  static const DatasetInfo info{"german", "german.data", make_german_schema(), 0.33, 100};
  return info;
}

const DatasetInfo& adult_dataset() {
  static const DatasetInfo info{"adult", "adult.data", make_adult_schema(), 0.5, 1000};
  return info;
}

const DatasetInfo& heloc_dataset() {
  static const DatasetInfo info{"heloc", "heloc_dataset_v1.csv", make_heloc_schema(), 0.25, 1000};
  return info;
}

const DatasetInfo& dataset_info(const std::string& id) {
  if (id == "german") return german_dataset();
  if (id == "adult") return adult_dataset();
  if (id == "heloc") return heloc_dataset();
  throw ConfigError("unknown dataset '" + id + "' (expected german, adult, heloc or synthetic)");
}

void save_dataset(const TabularDataset& ds, const std::filesystem::path& stem,
                  const std::vector<std::string>& notes) {
  if (!stem.parent_path().empty()) std::filesystem::create_directories(stem.parent_path());
  auto csv_path = stem;
  csv_path += ".csv";
  std::ofstream csv(csv_path);
  if (!csv) throw ConfigError("cannot write " + csv_path.string());
  for (const auto& n : ds.feature_names) csv << n << ',';
  csv << "label\n";
  char buf[40];
  for (Eigen::Index r = 0; r < ds.size(); ++r) {
    for (Eigen::Index c = 0; c < ds.dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.features(r, c));
      csv << buf << ',';
    }
    csv << ds.labels[static_cast<std::size_t>(r)] << '\n';
  }
  nlohmann::json norm = nlohmann::json::array();
  for (const auto& r : ds.normalization) norm.push_back({{"min", r.min}, {"max", r.max}});
  const nlohmann::json sidecar = {{"schema", kDatasetSchema},
                                  {"split", to_string(ds.split)},
                                  {"rows", ds.size()},
                                  {"feature_names", ds.feature_names},
                                  {"normalization", norm},
                                  {"notes", notes}};
  auto json_path = stem;
  json_path += ".json";
  std::ofstream js(json_path);
  if (!js) throw ConfigError("cannot write " + json_path.string());
  js << sidecar.dump(2) << '\n';
}

TabularDataset load_dataset(const std::filesystem::path& stem) {
  auto json_path = stem;
  json_path += ".json";
  std::ifstream js(json_path);
  if (!js) throw ConfigError("cannot read " + json_path.string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(js);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(json_path.string() + " byte " + std::to_string(e.byte), e.what());
  }
  if (!side.contains("schema") || side.at("schema") != kDatasetSchema) {
    throw VersionError(json_path.string() + ": unsupported dataset schema tag");
  }
  CsvSchema schema;
  schema.has_header = true;
  schema.missing_tokens = {};
  TabularDataset ds;
  try {
    ds.feature_names = side.at("feature_names").get<std::vector<std::string>>();
    for (const auto& r : side.at("normalization"))
      ds.normalization.push_back({r.at("min").get<double>(), r.at("max").get<double>()});
    ds.split = side.at("split") == "test" ? SplitTag::kTest : SplitTag::kTrain;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(json_path.string(), e.what());
  }
  for (const auto& n : ds.feature_names) schema.columns.push_back({n, ColumnKind::kNumeric});
  schema.columns.push_back({"label", ColumnKind::kLabel});
  auto csv_path = stem;
  csv_path += ".csv";
  const auto raw = load_csv(csv_path, schema);
  ds.labels = map_labels(raw);
  ds.features.resize(static_cast<Eigen::Index>(raw.rows()),
                     static_cast<Eigen::Index>(raw.columns.size()));
  for (std::size_t c = 0; c < raw.columns.size(); ++c)
    for (std::size_t r = 0; r < raw.rows(); ++r)
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = raw.columns[c].numbers[r];
  return ds;
}

}  // namespace entrocf
