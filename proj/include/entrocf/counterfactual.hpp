#pragma once

#include <string>

#include "entrocf/ensemble.hpp"
#include "entrocf/risk.hpp"

namespace entrocf {

enum class CfStatus { kValid, kInvalidCounterfactual, kClosestCfFailed };

const char* to_string(CfStatus s);

// Search settings for the closest counterfactual of a single model.
//
// The search is a proximal gradient method on
//     l1_penalty * ||z - x||_p + hinge(logit(0.5 + margin) - f(z)),
// f the model logit. Gradient steps are normalised so that `step` is measured
// in feature units, and for p = 1 the soft-threshold is set to
// l1_penalty * max_j |grad_j|, so only coordinates whose gradient is within
// that fraction of the largest one move away from x.
struct ClosestCfConfig {
  int norm_order = 1;        // 1 or 2
  double step = 0.05;        // initial step, feature units
  double step_decay = 0.9;   // applied each time an iterate re-enters the accepted region
  double min_step = 1e-4;
  double l1_penalty = 0.8;   // relative shrinkage, in [0, 1)
  double margin = 0.01;      // target m(z) >= 0.5 + margin
  int max_iter = 2000;
  bool box_project = true;   // clamp to [0, 1]^d after each step
  // p = 1 only: also try moving one coordinate at a time, scanning this many
  // points per unit length (0 = off).
  int coordinate_scan = 64;

  void validate() const;
};

struct ClosestCfOutcome {
  Vector point;     // best accepted iterate, or the last iterate on failure
  bool found = false;
  int iterations = 0;
};

// Returns x itself when the model already accepts it.
ClosestCfOutcome closest_counterfactual(const MlpModel& model, const Vector& x,
                                        const ClosestCfConfig& cfg);

double l1_distance(const Vector& a, const Vector& b);

struct CounterfactualResult {
  Vector x_prime;
  Vector closest;         // phase-1 point
  double cost_l1 = 0.0;   // ||x - x_prime||_1
  double risk_value = 0.0;
  double validity = 0.0;
  bool reference_valid = false;
  int iterations = 0;     // risk-descent iterations
  int closest_iterations = 0;
  CfStatus status = CfStatus::kClosestCfFailed;
  double wall_clock_ms = 0.0;
};

// Phase 1: closest counterfactual under the reference model. Phase 2: plain
// gradient descent on the ensemble entropic risk until risk < tau. A step that
// raises the risk is retried with half the step size.
CounterfactualResult entropic_counterfactual(const Vector& x, const Ensemble& ens,
                                             const RiskParams& params,
                                             const ClosestCfConfig& cf_cfg);

// Phase 2 only, starting from an already computed phase-1 outcome. The
// returned wall_clock_ms covers this call only.
CounterfactualResult repair_counterfactual(const Vector& x, const ClosestCfOutcome& closest,
                                           const Ensemble& ens, const RiskParams& params,
                                           const ClosestCfConfig& cf_cfg);

}  // namespace entrocf
