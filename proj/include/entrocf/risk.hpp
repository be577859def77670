#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entrocf/ensemble.hpp"

namespace entrocf {

// Knobs of the risk-constrained search.
struct RiskParams {
  double theta = 1.0;  // risk aversion, > 0
  double tau = 0.5;    // risk threshold, in (0, 1] for the loss 1 - m
  double eta = 0.01;   // descent step size
  int max_iter = 500;

  void validate() const;
};

// Losses of the ensemble members together with their probabilities.
struct LossSample {
  std::vector<double> losses;
  std::vector<double> weights;

  static LossSample uniform(std::vector<double> losses);
  void validate() const;
};

// (1/theta) log sum_i w_i exp(theta * l_i), evaluated with a max shift and
// log1p/expm1 so that small theta keeps full relative precision.
double entropic_risk(const LossSample& sample, double theta);

// Exponential tilt q_i proportional to w_i exp(theta * l_i).
std::vector<double> exponential_tilt(const LossSample& sample, double theta);

// Losses 1 - m_i(x) with the ensemble's weights.
LossSample ensemble_losses(const Ensemble& ens, const Vector& x);

double ensemble_risk(const Ensemble& ens, const Vector& x, double theta);

// -sum_i q_i grad m_i(x), q the exponential tilt.
Vector ensemble_risk_gradient(const Ensemble& ens, const Vector& x, double theta);

struct RiskEvaluation {
  double risk = 0.0;
  Vector gradient;
  std::vector<double> outputs;
};

// Risk, gradient and member outputs from one pass over the members.
RiskEvaluation evaluate_ensemble_risk(const Ensemble& ens, const Vector& x, double theta);

// (1 - tau) + K, K = (1/theta) log(sinh(theta delta) / (theta delta)): the
// smallest m(x') meeting the risk constraint when member outputs are uniform
// on [m - delta, m + delta].
double uniform_threshold(double delta, double theta, double tau);

struct TruncatedGaussianCheck {
  bool satisfied = false;
  double threshold = 0.0;  // (1 - tau) + theta sigma^2 / 2 + log(K_theta) / theta
  double margin = 0.0;     // mu - threshold
};

// Risk constraint when member outputs follow N(mu, sigma^2) truncated to
// [0, 1]; the predicate is mu > threshold.
TruncatedGaussianCheck truncated_gaussian_predicate(double mu, double sigma, double theta,
                                                    double tau);

// Standard normal CDF.
double normal_cdf(double x);

// rho - (E_q[l] - KL(q || w) / theta). Nonnegative for every admissible q and
// zero at the exponential tilt.
double dual_gap(const LossSample& sample, double theta, const std::vector<double>& q);

struct PropertyCheck {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // the most adverse value seen
  std::string detail;
};

// Randomised checks of the risk axioms, limits, dual representation and the
// ensemble-risk gradient. Used by the `verify` command.
std::vector<PropertyCheck> verify_risk_properties(std::uint64_t seed, int trials = 1000);

}  // namespace entrocf
