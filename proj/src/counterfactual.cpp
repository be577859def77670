#include "entrocf/counterfactual.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "entrocf/errors.hpp"

namespace entrocf {

const char* to_string(CfStatus s) {
  switch (s) {
    case CfStatus::kValid:
      return "Valid";
    case CfStatus::kInvalidCounterfactual:
      return "InvalidCounterfactual";
    case CfStatus::kClosestCfFailed:
      return "ClosestCfFailed";
  }
  return "?";
}

void ClosestCfConfig::validate() const {
  if (norm_order != 1 && norm_order != 2) throw ConfigError("norm_order must be 1 or 2");
  if (!(step > 0.0)) throw ConfigError("step must be positive");
  if (!(step_decay > 0.0 && step_decay <= 1.0)) throw ConfigError("step_decay must lie in (0, 1]");
  if (!(min_step > 0.0)) throw ConfigError("min_step must be positive");
  if (!(l1_penalty >= 0.0 && l1_penalty < 1.0)) throw ConfigError("l1_penalty must lie in [0, 1)");
  if (!(margin >= 0.0 && margin < 0.5)) throw ConfigError("margin must lie in [0, 0.5)");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (coordinate_scan < 0) throw ConfigError("coordinate_scan must be nonnegative");
}

double l1_distance(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().sum(); }

namespace {

double distance(const Vector& a, const Vector& b, int p) {
  return p == 1 ? l1_distance(a, b) : (a - b).norm();
}

void project_box(Vector& z) { z = z.cwiseMax(0.0).cwiseMin(1.0); }

// prox of t * ||.||_1 (p = 1) or t * ||.||_2 (p = 2) at d.
void shrink(Vector& d, double t, int p) {
  if (p == 1) {
    for (Eigen::Index j = 0; j < d.size(); ++j) {
      const double a = std::abs(d(j)) - t;
      d(j) = a > 0.0 ? std::copysign(a, d(j)) : 0.0;
    }
  } else {
    const double n = d.norm();
    d = n > t ? Vector(d * (1.0 - t / n)) : Vector(Vector::Zero(d.size()));
  }
}

// Moves along a single coordinate are the vertices of the l1 ball, and the
// gradient search above often misses them when the boundary is curved. Each
// ray x + t e_j is scanned at `coordinate_scan` points per unit length up to
// the current best cost (or the box), then the first crossing is bisected.
void coordinate_candidates(const MlpModel& model, const Vector& x, const ClosestCfConfig& cfg,
                           double& best_cost, ClosestCfOutcome& out) {
  const double h = 1.0 / cfg.coordinate_scan;
  const double cap = std::isfinite(best_cost) ? best_cost : 1.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    for (double sign : {1.0, -1.0}) {
      double limit = cap;
      if (cfg.box_project) limit = std::min(limit, sign > 0 ? 1.0 - x(j) : x(j));
      if (!(limit > 0.0)) continue;
      const int n = static_cast<int>(std::ceil(limit / h));
      Matrix rays = x.transpose().replicate(n, 1);
      for (int k = 0; k < n; ++k) rays(k, j) += sign * std::min(limit, (k + 1) * h);
      const Vector m = model.forward_batch(rays);
      int hit = -1;
      for (int k = 0; k < n && hit < 0; ++k) {
        if (m(k) >= 0.5) hit = k;
      }
      if (hit < 0) continue;
      double lo = hit * h, hi = std::min(limit, (hit + 1) * h);
      Vector z = x;
      for (int b = 0; b < 40 && hi - lo > 1e-12; ++b) {
        const double mid = 0.5 * (lo + hi);
        z(j) = x(j) + sign * mid;
        (model.forward(z) >= 0.5 ? hi : lo) = mid;
      }
      if (hi < best_cost) {
        z(j) = x(j) + sign * hi;
        best_cost = hi;
        out.point = z;
        out.found = true;
      }
    }
  }
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

ClosestCfOutcome closest_counterfactual(const MlpModel& model, const Vector& x,
                                        const ClosestCfConfig& cfg) {
  cfg.validate();
  if (x.size() != model.input_dim()) throw ShapeError("instance length does not match the model");
  ClosestCfOutcome out;
  out.point = x;
  if (model.forward(x) >= 0.5) {
    out.found = true;
    return out;
  }

  const double target = std::log((0.5 + cfg.margin) / (0.5 - cfg.margin));
  const int p = cfg.norm_order;
  double best_cost = std::numeric_limits<double>::infinity();
  double step = cfg.step;
  bool was_inside = false;
  Vector z = x;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    out.iterations = it;
    const auto ev = model.evaluate(z);
    if (ev.probability >= 0.5) {
      const double c = distance(z, x, p);
      if (c < best_cost) {
        best_cost = c;
        out.point = z;
        out.found = true;
      }
    }
    const bool inside = ev.logit >= target;
    if (inside && !was_inside && it > 1) {
      step *= cfg.step_decay;
      if (step < cfg.min_step) break;
    }
    was_inside = inside;

    Vector d = z - x;
    if (!inside) {
      const Vector& g = ev.logit_gradient;
      // The step is normalised by the coordinates that can still move;
      // pinned ones keep their full push so they stay on the box.
      Vector free = g;
      if (cfg.box_project) {
        for (Eigen::Index j = 0; j < g.size(); ++j) {
          if ((z(j) >= 1.0 && g(j) > 0.0) || (z(j) <= 0.0 && g(j) < 0.0)) free(j) = 0.0;
        }
      }
      const double scale = p == 1 ? free.cwiseAbs().maxCoeff() : free.norm();
      if (!(scale > 0.0)) break;  // flat region or boxed in
      d += (step / scale) * g;
    }
    shrink(d, step * cfg.l1_penalty, p);
    z = x + d;
    if (cfg.box_project) project_box(z);
  }
  if (!out.found) out.point = z;
  if (p == 1 && cfg.coordinate_scan > 0) {
    coordinate_candidates(model, x, cfg, best_cost, out);
  }
  return out;
}

CounterfactualResult repair_counterfactual(const Vector& x, const ClosestCfOutcome& closest,
                                           const Ensemble& ens, const RiskParams& params,
                                           const ClosestCfConfig& cf_cfg) {
  params.validate();
  if (x.size() != ens.input_dim()) throw ShapeError("instance length does not match the ensemble");
  const auto start = Clock::now();

  CounterfactualResult r;
  r.closest = closest.point;
  r.closest_iterations = closest.iterations;
  Vector z = closest.point;

  if (!closest.found) {
    r.status = CfStatus::kClosestCfFailed;
  } else {
    auto ev = evaluate_ensemble_risk(ens, z, params.theta);
    double eta = params.eta;
    const double eta_floor = params.eta * 1e-12;
    int it = 0;
    while (ev.risk >= params.tau && it < params.max_iter) {
      ++it;
      Vector trial = z - eta * ev.gradient;
      if (cf_cfg.box_project) project_box(trial);
      auto next = evaluate_ensemble_risk(ens, trial, params.theta);
      if (next.risk < ev.risk) {
        z = std::move(trial);
        ev = std::move(next);
      } else {
        eta *= 0.5;
        if (eta < eta_floor) break;
      }
    }
    r.iterations = it;
    r.risk_value = ev.risk;
    r.status = ev.risk < params.tau ? CfStatus::kValid : CfStatus::kInvalidCounterfactual;
  }

  r.x_prime = z;
  r.cost_l1 = l1_distance(x, z);
  if (r.status == CfStatus::kClosestCfFailed) r.risk_value = ensemble_risk(ens, z, params.theta);
  r.validity = ens.validity(z);
  r.reference_valid = ens.reference().forward(z) >= 0.5;
  r.wall_clock_ms = elapsed_ms(start);
  return r;
}

CounterfactualResult entropic_counterfactual(const Vector& x, const Ensemble& ens,
                                             const RiskParams& params,
                                             const ClosestCfConfig& cf_cfg) {
  params.validate();
  const auto start = Clock::now();
  const auto closest = closest_counterfactual(ens.reference(), x, cf_cfg);
  auto r = repair_counterfactual(x, closest, ens, params, cf_cfg);
  r.wall_clock_ms = elapsed_ms(start);
  return r;
}

}  // namespace entrocf
