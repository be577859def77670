#include <fstream>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "entrocf/data/pipeline.hpp"
#include "entrocf/ensemble.hpp"
#include "entrocf/errors.hpp"

using namespace entrocf;
using testing::constant_model;

TEST_CASE("validity counts accepting members") {
  const Vector x = Vector::Constant(2, 0.5);
  SUBCASE("all accept") {
    const Ensemble e({constant_model(2, 0.6), constant_model(2, 0.9), constant_model(2, 0.5)}, 0);
    CHECK(e.validity(x) == 1.0);
  }
  SUBCASE("half accept") {
    const Ensemble e({constant_model(2, 0.6), constant_model(2, 0.4), constant_model(2, 0.9),
                      constant_model(2, 0.1)},
                     1);
    CHECK(e.validity(x) == 0.5);
  }
  SUBCASE("adding an accepting member raises the numerator by one") {
    std::vector<MlpModel> ms = {constant_model(2, 0.3), constant_model(2, 0.7), constant_model(2, 0.2)};
    const Ensemble a(ms, 0);
    ms.push_back(constant_model(2, 0.8));
    const Ensemble b(ms, 0);
    CHECK(a.validity(x) * 3 + 1 == doctest::Approx(b.validity(x) * 4));
  }
}

TEST_CASE("ensemble invariants") {
  CHECK_THROWS_AS(Ensemble({}, 0), ConfigError);
  CHECK_THROWS_AS(Ensemble({constant_model(2, 0.5), constant_model(3, 0.5)}, 0), ShapeError);
  CHECK_THROWS_AS(Ensemble({constant_model(2, 0.5)}, 1), ConfigError);
  CHECK_THROWS_AS(Ensemble({constant_model(2, 0.5), constant_model(2, 0.5)}, 0, {0.7, 0.4}), ParameterError);
  CHECK_THROWS_AS(Ensemble({constant_model(2, 0.5), constant_model(2, 0.5)}, 0, {1.5, -0.5}), ParameterError);
  const Ensemble e({constant_model(2, 0.5), constant_model(2, 0.5)}, 0, {0.25, 0.75});
  CHECK(e.weights()[1] == 0.75);
  const Ensemble u({constant_model(2, 0.5), constant_model(2, 0.5), constant_model(2, 0.5)}, 2);
  CHECK(u.weights() == std::vector<double>(3, 1.0 / 3.0));
}

TEST_CASE("prefix keeps the reference and uniform weights") {
  const Ensemble e({constant_model(2, 0.2), constant_model(2, 0.4), constant_model(2, 0.6),
                    constant_model(2, 0.8)},
                   1);
  const auto p = e.prefix(2);
  CHECK(p.size() == 2);
  CHECK(p.reference_index() == 1);
  CHECK(p.weights() == std::vector<double>{0.5, 0.5});
  CHECK_THROWS_AS(e.prefix(1), ConfigError);
  CHECK_THROWS_AS(e.prefix(5), ConfigError);
  CHECK(e.with_reference(3).reference().forward(Vector::Zero(2)) == doctest::Approx(0.8));
}

TEST_CASE("build_ensemble") {
  const auto data = synth_blobs(60, 0.4, 3);
  EnsembleBuildConfig cfg;
  cfg.n_models = 3;
  cfg.train_cfg.epochs = 3;
  cfg.train_cfg.hidden = {4};
  cfg.seed = 17;

  SUBCASE("no dropped points and shared init give identical members") {
    cfg.shared_init = true;
    const auto e = build_ensemble(data, cfg);
    CHECK(e.model(0) == e.model(1));
    CHECK(e.model(1) == e.model(2));
  }
  SUBCASE("dropping points decorrelates members and is reproducible") {
    cfg.drop_k = 10;
    const auto a = build_ensemble(data, cfg);
    const auto b = build_ensemble(data, cfg);
    CHECK_FALSE(a.model(0) == a.model(1));
    for (int i = 0; i < 3; ++i) CHECK(a.model(i) == b.model(i));
    CHECK(a.reference_index() == b.reference_index());
    CHECK(a.reference_index() >= 0);
    CHECK(a.reference_index() < 3);
  }
  SUBCASE("reference pool") {
    cfg.reference_pool = 1;
    CHECK(build_ensemble(data, cfg).reference_index() == 0);
  }
  SUBCASE("too many dropped points") {
    cfg.drop_k = 60;
    CHECK_THROWS_AS(build_ensemble(data, cfg), ConfigError);
  }
}

TEST_CASE("ensemble files") {
  std::vector<MlpModel> ms;
  const std::vector<int> hidden = {5};
  for (int i = 0; i < 3; ++i) ms.push_back(MlpModel::random(4, hidden, 100 + i));
  const Ensemble e(ms, 2, {0.2, 0.3, 0.5}, 99);
  testing::TempDir dir("ens");
  save_ensemble(e, dir.path());
  const auto back = load_ensemble(dir.path());
  CHECK(back.reference_index() == 2);
  CHECK(back.weights() == e.weights());
  CHECK(back.seed() == 99);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    const Vector x = testing::random_point(rng, 4);
    CHECK(back.outputs(x) == e.outputs(x));
  }

  SUBCASE("truncated manifest") {
    std::ifstream in(dir.path() / "ensemble.json");
    const std::string text((std::istreambuf_iterator<char>(in)), {});
    std::ofstream(dir.path() / "ensemble.json") << text.substr(0, text.size() - 10);
    CHECK_THROWS_AS(load_ensemble(dir.path()), ParseError);
  }
  SUBCASE("schema mismatch") {
    std::ifstream in(dir.path() / "ensemble.json");
    auto j = nlohmann::json::parse(in);
    j["schema"] = "entrocf.ensemble/0";
    std::ofstream(dir.path() / "ensemble.json") << j.dump();
    CHECK_THROWS_AS(load_ensemble(dir.path()), VersionError);
  }
}
