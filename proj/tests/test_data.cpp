#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"

#include "entrocf/data/pipeline.hpp"
#include "entrocf/errors.hpp"

using namespace entrocf;

namespace {

const std::filesystem::path kData = ENTROCF_DATA_DIR;

CsvSchema small_schema() {
  CsvSchema s;
  s.name = "small";
  s.columns = {{"a", ColumnKind::kNumeric},
               {"colour", ColumnKind::kCategorical},
               {"note", ColumnKind::kIgnore},
               {"y", ColumnKind::kLabel}};
  s.positive_labels = {"yes"};
  s.negative_labels = {"no"};
  return s;
}

const char* kSmall =
    "y,note,colour,a\n"
    "yes,x,red,1.5\n"
    "no,x,blue,3\n"
    "yes,?,green,0\n"
    "no,x,red,-2\n"
    "yes,x,?,7\n"
    "no,x,blue,4\n"
    "yes,x,green,5\n"
    "no,x,red,6\n";

}  // namespace

TEST_CASE("parse_csv matches columns by header name") {
  const auto t = parse_csv(kSmall, small_schema());
  CHECK(t.rows() == 7);  // the row with '?' in a used column is dropped
  CHECK(t.dropped_rows == 1);
  CHECK(t.feature_count() == 2);
  CHECK(t.columns[0].numbers.front() == 1.5);
  CHECK(t.columns[1].strings[1] == "blue");
  CHECK(t.labels[3] == "no");
}

TEST_CASE("parse errors carry a location") {
  SUBCASE("bad number") {
    try {
      parse_csv("y,note,colour,a\nyes,x,red,abc\n", small_schema(), "f.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.location().find("f.csv:2") == 0);
      CHECK(e.location().find("'a'") != std::string::npos);
    }
  }
  SUBCASE("missing header column") {
    CHECK_THROWS_AS(parse_csv("y,note,a\nyes,x,1\n", small_schema()), ParseError);
  }
  SUBCASE("ragged row") {
    CHECK_THROWS_AS(parse_csv("y,note,colour,a\nyes,x,red\n", small_schema()), ParseError);
  }
  SUBCASE("empty file") {
    CHECK_THROWS_AS(parse_csv("", small_schema()), ParseError);
    testing::TempDir dir("data");
    std::ofstream(dir.path() / "empty.csv").close();
    CHECK_THROWS_AS(load_csv(dir.path() / "empty.csv", small_schema()), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", small_schema()), ConfigError);
  }
}

TEST_CASE("preprocess: encoding, scaling and warnings") {
  const auto t = parse_csv(kSmall, small_schema());
  PrepConfig cfg;
  cfg.seed = 3;
  cfg.test_fraction = 0.3;
  const auto p = preprocess(t, cfg);
  CHECK(p.train.size() + p.test.size() == 7);
  CHECK(p.test.size() == 2);
  CHECK(p.train.split == SplitTag::kTrain);
  CHECK(p.test.split == SplitTag::kTest);
  // numeric column plus up to three colour indicators
  CHECK(p.train.dim() <= 4);
  CHECK(p.train.feature_names.front() == "a");
  CHECK(p.train.features.minCoeff() >= 0.0);
  CHECK(p.train.features.maxCoeff() <= 1.0);
  CHECK(p.test.features.minCoeff() >= 0.0);
  CHECK(p.test.features.maxCoeff() <= 1.0);
  REQUIRE_FALSE(p.warnings.empty());
  CHECK(p.warnings.front().find("dropped 1 rows") != std::string::npos);
}

TEST_CASE("preprocess: statistics come from the training split only") {
  const auto t = parse_csv(kSmall, small_schema());
  const auto p = preprocess(t, {5, 0.3, 1.0});
  // unnormalised training data refits to exactly the stored ranges
  const auto raw_train = invert_ranges(p.train.features, p.train.normalization);
  const auto refit = fit_ranges(raw_train);
  for (std::size_t c = 0; c < refit.size(); ++c) {
    CHECK(refit[c].min == doctest::Approx(p.train.normalization[c].min));
    CHECK(refit[c].max == doctest::Approx(p.train.normalization[c].max));
  }
  CHECK(p.test.normalization.size() == p.train.normalization.size());
  for (std::size_t c = 0; c < refit.size(); ++c) {
    CHECK(p.test.normalization[c].min == p.train.normalization[c].min);
    CHECK(p.test.normalization[c].max == p.train.normalization[c].max);
  }
}

TEST_CASE("preprocess: constant column dropped, nonbinary labels rejected") {
  CsvSchema s;
  s.columns = {{"a", ColumnKind::kNumeric}, {"k", ColumnKind::kNumeric}, {"y", ColumnKind::kLabel}};
  const auto t = parse_csv("a,k,y\n1,5,1\n2,5,0\n3,5,1\n4,5,0\n", s);
  const auto p = preprocess(t, {0, 0.25, 1.0});
  CHECK(p.train.dim() == 1);
  CHECK(p.train.feature_names == std::vector<std::string>{"a"});
  bool warned = false;
  for (const auto& w : p.warnings) warned = warned || w.find("'k'") != std::string::npos;
  CHECK(warned);

  const auto bad = parse_csv("a,k,y\n1,5,1\n2,5,2\n3,5,1\n", s);
  CHECK_THROWS_AS(preprocess(bad, {}), ConfigError);
}

TEST_CASE("range helpers") {
  Eigen::MatrixXd x(3, 2);
  x << 1, -1, 2, 0, 5, 3;
  const auto r = fit_ranges(x);
  const auto n = apply_ranges(x, r, false);
  CHECK(n.minCoeff() == 0.0);
  CHECK(n.maxCoeff() == 1.0);
  CHECK((invert_ranges(n, r) - x).cwiseAbs().maxCoeff() < 1e-15);
  // normalising normalised data changes nothing
  CHECK((apply_ranges(n, fit_ranges(n), false) - n).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd far(1, 2);
  far << 10, -10;
  const auto c = apply_ranges(far, r, true);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(0, 1) == 0.0);
  CHECK_THROWS_AS(apply_ranges(far, {r[0]}, true), ShapeError);
}

TEST_CASE("synthetic blobs") {
  const auto a = synth_blobs(50, 0.3, 4);
  const auto b = synth_blobs(50, 0.3, 4);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.features.minCoeff() >= 0.0);
  CHECK(a.features.maxCoeff() <= 1.0);

  const auto tiny = synth_blobs(4, 0.3, 1);
  CHECK(std::count(tiny.labels.begin(), tiny.labels.end(), 1) == 2);
  CHECK_THROWS_AS(synth_blobs(3, 0.3, 1), ConfigError);

  // centres on the diagonal: the line x0 + x1 = 1 separates well-spaced blobs
  const auto wide = synth_blobs(400, 0.9, 2);
  int correct = 0;
  for (Eigen::Index i = 0; i < wide.size(); ++i) {
    correct += (wide.features(i, 0) + wide.features(i, 1) >= 1.0) == (wide.labels[static_cast<std::size_t>(i)] == 1);
  }
  CHECK(correct == 400);
}

TEST_CASE("dataset cache round trip") {
  const auto ds = synth_blobs(20, 0.3, 1);
  testing::TempDir dir("data");
  save_dataset(ds, dir.path() / "train", {"note"});
  const auto back = load_dataset(dir.path() / "train");
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK(back.feature_names == ds.feature_names);
  CHECK(back.split == ds.split);
}

TEST_CASE("German credit file") {
  const auto& info = german_dataset();
  const auto raw = load_csv(kData / info.file_name, info.schema);
  CHECK(raw.rows() == 1000);
  CHECK(raw.feature_count() == 20);
  const auto p = preprocess(raw, {0, info.test_fraction, 1.0});
  CHECK(p.train.size() == 670);
  CHECK(p.test.size() == 330);
  const auto desk = preprocess(raw, {0, info.test_fraction, 0.1});
  CHECK(desk.train.size() == 67);
  CHECK(desk.test.size() == 33);
}

TEST_CASE("Adult income file") {
  const auto& info = adult_dataset();
  const auto raw = load_csv(kData / info.file_name, info.schema);
  CHECK(raw.rows() == 30162);
  CHECK(raw.dropped_rows == 2399);
  const auto p = preprocess(raw, {0, info.test_fraction, 1.0});
  CHECK(p.train.size() == 15081);
  CHECK(p.test.size() == 15081);
}

TEST_CASE("HELOC file, when present") {
  const auto& info = heloc_dataset();
  const auto path = kData / info.file_name;
  if (!std::filesystem::exists(path)) {
    MESSAGE("heloc_dataset_v1.csv not present, skipping");
    return;
  }
  const auto raw = load_csv(path, info.schema);
  CHECK(raw.rows() + raw.dropped_rows == 10459);
}

TEST_CASE("dataset registry") {
  CHECK(dataset_info("german").published_drop_k == 100);
  CHECK(dataset_info("adult").published_drop_k == 1000);
  CHECK(dataset_info("heloc").published_drop_k == 1000);
  CHECK_THROWS_AS(dataset_info("mnist"), ConfigError);
}
