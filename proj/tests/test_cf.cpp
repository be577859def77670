#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "entrocf/counterfactual.hpp"
#include "entrocf/errors.hpp"

using namespace entrocf;
using testing::constant_model;
using testing::linear_model;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("closest counterfactual: already accepted") {
  const auto m = linear_model(vec({1.0, 1.0}), -0.5);
  const Vector x = vec({0.6, 0.6});
  const auto out = closest_counterfactual(m, x, {});
  CHECK(out.found);
  CHECK(out.iterations == 0);
  CHECK(l1_distance(out.point, x) == 0.0);
}

TEST_CASE("closest counterfactual: linear model, l1") {
  // boundary x1 = 0.6; only the coordinate with the largest |w| moves
  const auto m = linear_model(vec({4.0, 0.0}), -2.4);
  const Vector x = vec({0.4, 0.5});
  for (int scan : {64, 0}) {
    ClosestCfConfig cfg;
    cfg.coordinate_scan = scan;
    const auto out = closest_counterfactual(m, x, cfg);
    REQUIRE(out.found);
    CHECK(m.forward(out.point) >= 0.5);
    CHECK(out.point(0) == doctest::Approx(0.6).epsilon(0.01));
    CHECK(out.point(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(l1_distance(out.point, x) == doctest::Approx(0.2).epsilon(0.05));
  }
}

TEST_CASE("closest counterfactual: box forces a second coordinate") {
  // x1 can only rise by 0.1, the rest has to come from x2
  const auto m = linear_model(vec({3.0, 1.0}), -3.5);
  const Vector x = vec({0.9, 0.2});
  const auto out = closest_counterfactual(m, x, {});
  REQUIRE(out.found);
  // oracle: 0.1 on x1 (gain 0.3) then 0.5 / 1 on x2
  CHECK(l1_distance(out.point, x) <= 1.05 * 0.6);
  CHECK(out.point(0) == doctest::Approx(1.0));
}

TEST_CASE("closest counterfactual: linear model, l2") {
  const auto m = linear_model(vec({3.0, 4.0}), -3.0);
  const Vector x = vec({0.3, 0.3});
  ClosestCfConfig cfg;
  cfg.norm_order = 2;
  const auto out = closest_counterfactual(m, x, cfg);
  REQUIRE(out.found);
  // distance to the hyperplane: |w.x + b| / |w| = 0.9 / 5
  CHECK((out.point - x).norm() <= 1.05 * 0.18);
  CHECK(m.forward(out.point) >= 0.5);
}

TEST_CASE("closest counterfactual: iteration budget exhausted") {
  const auto m = linear_model(vec({1.0, 0.0}), -0.95);
  ClosestCfConfig cfg;
  cfg.max_iter = 1;
  cfg.coordinate_scan = 0;
  const auto out = closest_counterfactual(m, vec({0.0, 0.5}), cfg);
  CHECK_FALSE(out.found);

  const Ensemble e({m}, 0);
  const auto r = entropic_counterfactual(vec({0.0, 0.5}), e, {}, cfg);
  CHECK(r.status == CfStatus::kClosestCfFailed);
  CHECK(r.iterations == 0);
}

TEST_CASE("closest counterfactual config") {
  ClosestCfConfig c;
  c.norm_order = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.margin = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.l1_penalty = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(closest_counterfactual(constant_model(2, 0.2), Vector::Zero(3), {}), ShapeError);
}

TEST_CASE("repair: identical members need no iterations") {
  const auto m = linear_model(vec({2.0, 0.0}), 0.0);
  const Ensemble e({m, m, m}, 0);
  ClosestCfOutcome start;
  start.point = vec({std::log(9.0) / 2.0, 0.3});  // m = 0.9
  start.found = true;
  RiskParams p;
  p.tau = 0.5;
  const auto r = repair_counterfactual(vec({0.0, 0.3}), start, e, p, {});
  CHECK(r.status == CfStatus::kValid);
  CHECK(r.iterations == 0);
  CHECK(r.risk_value == doctest::Approx(0.1));
  CHECK((r.x_prime - start.point).norm() == 0.0);
}

TEST_CASE("repair: two shifted boundaries") {
  // reference accepts x1 >= 0.5, the other member x1 >= 0.6
  const auto ref = linear_model(vec({20.0, 0.0}), -10.0);
  const auto other = linear_model(vec({20.0, 0.0}), -12.0);
  const Ensemble e({ref, other}, 0);
  const Vector x = vec({0.3, 0.5});
  RiskParams p;
  p.theta = 0.1;
  p.tau = 0.4;
  const auto r = entropic_counterfactual(x, e, p, {});
  CHECK(ref.forward(r.closest) >= 0.5);
  CHECK(other.forward(r.closest) < 0.5);
  REQUIRE(r.status == CfStatus::kValid);
  CHECK(r.validity == 1.0);
  CHECK(r.reference_valid);
  CHECK(r.risk_value < p.tau);
  CHECK(r.risk_value == ensemble_risk(e, r.x_prime, p.theta));
  CHECK(r.cost_l1 == (x - r.x_prime).cwiseAbs().sum());
  CHECK(r.wall_clock_ms >= 0.0);
}

TEST_CASE("repair: each accepted step lowers the risk") {
  std::mt19937_64 rng(21);
  const std::vector<int> hidden = {8, 8};
  const Ensemble e({MlpModel::random(3, hidden, 1), MlpModel::random(3, hidden, 2), MlpModel::random(3, hidden, 3),
                    MlpModel::random(3, hidden, 4)},
                   0);
  ClosestCfOutcome start;
  start.point = testing::random_point(rng, 3);
  start.found = true;
  RiskParams p;
  p.theta = 2.0;
  p.tau = 0.05;
  p.eta = 0.5;
  double previous = ensemble_risk(e, start.point, p.theta);
  for (int k = 1; k <= 30; ++k) {
    p.max_iter = k;
    const auto r = repair_counterfactual(start.point, start, e, p, {});
    CHECK(r.risk_value < previous + 1e-12);
    previous = r.risk_value;
  }
}

TEST_CASE("repair: unreachable threshold") {
  // members disagree on the sign of x1, so the risk stays near one half
  const auto a = linear_model(vec({5.0, 0.0}), -2.5);
  const auto b = linear_model(vec({-5.0, 0.0}), 2.5);
  const Ensemble e({a, b}, 0);
  RiskParams p;
  p.tau = 0.001;
  p.max_iter = 5;
  const auto r = entropic_counterfactual(vec({0.2, 0.5}), e, p, {});
  CHECK(r.status == CfStatus::kInvalidCounterfactual);
  CHECK(r.risk_value >= p.tau);
}

TEST_CASE("status names") {
  CHECK(std::string(to_string(CfStatus::kValid)) == "Valid");
  CHECK(std::string(to_string(CfStatus::kInvalidCounterfactual)) == "InvalidCounterfactual");
  CHECK(std::string(to_string(CfStatus::kClosestCfFailed)) == "ClosestCfFailed");
}
