#include "entrocf/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "entrocf/errors.hpp"

namespace entrocf {

void RiskParams::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("theta must be positive and finite");
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ConfigError("tau must lie in (0, 1]; other thresholds are infeasible for the loss 1 - m");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive and finite");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
}

LossSample LossSample::uniform(std::vector<double> losses) {
  LossSample s;
  s.weights.assign(losses.size(), losses.empty() ? 0.0 : 1.0 / static_cast<double>(losses.size()));
  s.losses = std::move(losses);
  return s;
}

void LossSample::validate() const {
  if (losses.empty()) throw ParameterError("loss sample is empty");
  if (weights.size() != losses.size()) throw ShapeError("loss sample weights and losses differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!std::isfinite(losses[i])) throw ParameterError("losses must be finite");
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw ParameterError("weights must be nonnegative");
    }
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("weights must sum to 1");
}

namespace {

void check_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ParameterError("theta must be positive and finite");
}

struct Shifted {
  double max_loss = -std::numeric_limits<double>::infinity();
  double total_weight = 0.0;
  double excess = 0.0;  // sum_i w_i expm1(theta (l_i - max_loss)) / total_weight
};

Shifted shift(const LossSample& s, double theta) {
  Shifted out;
  for (std::size_t i = 0; i < s.losses.size(); ++i) {
    if (s.weights[i] > 0.0) out.max_loss = std::max(out.max_loss, s.losses[i]);
  }
  if (!std::isfinite(out.max_loss)) throw ParameterError("weights have no mass");
  for (std::size_t i = 0; i < s.losses.size(); ++i) {
    if (s.weights[i] == 0.0) continue;
    out.total_weight += s.weights[i];
    out.excess += s.weights[i] * std::expm1(theta * (s.losses[i] - out.max_loss));
  }
  out.excess /= out.total_weight;
  return out;
}

}  // namespace

double entropic_risk(const LossSample& sample, double theta) {
  check_theta(theta);
  sample.validate();
  const auto s = shift(sample, theta);
  return s.max_loss + std::log1p(s.excess) / theta;
}

std::vector<double> exponential_tilt(const LossSample& sample, double theta) {
  check_theta(theta);
  sample.validate();
  const auto s = shift(sample, theta);
  std::vector<double> q(sample.losses.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (sample.weights[i] == 0.0) continue;
    q[i] = sample.weights[i] * std::exp(theta * (sample.losses[i] - s.max_loss));
    z += q[i];
  }
  for (double& v : q) v /= z;
  return q;
}

LossSample ensemble_losses(const Ensemble& ens, const Vector& x) {
  LossSample s;
  s.losses.reserve(static_cast<std::size_t>(ens.size()));
  for (double m : ens.outputs(x)) s.losses.push_back(1.0 - m);
  s.weights = ens.weights();
  return s;
}

double ensemble_risk(const Ensemble& ens, const Vector& x, double theta) {
  return entropic_risk(ensemble_losses(ens, x), theta);
}

RiskEvaluation evaluate_ensemble_risk(const Ensemble& ens, const Vector& x, double theta) {
  check_theta(theta);
  const auto n = static_cast<std::size_t>(ens.size());
  LossSample sample;
  sample.losses.reserve(n);
  sample.weights = ens.weights();
  std::vector<Vector> grads;
  grads.reserve(n);
  RiskEvaluation out;
  out.outputs.reserve(n);
  for (const auto& m : ens.models()) {
    auto ev = m.evaluate(x);
    const double p = ev.probability;
    out.outputs.push_back(p);
    sample.losses.push_back(1.0 - p);
    grads.push_back((p * (1.0 - p)) * ev.logit_gradient);
  }
  out.risk = entropic_risk(sample, theta);
  const auto q = exponential_tilt(sample, theta);
  out.gradient = Vector::Zero(x.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (q[i] != 0.0) out.gradient -= q[i] * grads[i];
  }
  return out;
}

Vector ensemble_risk_gradient(const Ensemble& ens, const Vector& x, double theta) {
  return evaluate_ensemble_risk(ens, x, theta).gradient;
}

double uniform_threshold(double delta, double theta, double tau) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("delta must be positive");
  check_theta(theta);
  if (!std::isfinite(tau)) throw ParameterError("tau must be finite");
  const double u = theta * delta;
  double log_ratio;  // log(sinh(u) / u)
  if (u < 1e-4) {
    log_ratio = u * u / 6.0;
  } else if (u < 20.0) {
    log_ratio = std::log(std::sinh(u) / u);
  } else {
    log_ratio = u + std::log1p(-std::exp(-2.0 * u)) - std::log(2.0 * u);
  }
  return (1.0 - tau) + log_ratio / theta;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

// log P(Z > x) for x >= 0.
double log_upper_tail(double x) {
  if (x < 35.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 - inv2 + 3.0 * inv2 * inv2 - 15.0 * inv2 * inv2 * inv2;
  return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

// log P(a < Z < b), a < b.
double log_normal_mass(double a, double b) {
  if (a >= 0.0) {
    const double la = log_upper_tail(a);
    const double lb = log_upper_tail(b);
    return la + std::log1p(-std::exp(lb - la));
  }
  if (b <= 0.0) return log_normal_mass(-b, -a);
  return std::log(normal_cdf(b) - normal_cdf(a));
}

}  // namespace

TruncatedGaussianCheck truncated_gaussian_predicate(double mu, double sigma, double theta,
                                                    double tau) {
  if (!(mu > 0.0 && mu < 1.0)) throw ParameterError("mu must lie in (0, 1)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be positive");
  check_theta(theta);
  if (!(tau > 0.0 && tau <= 1.0)) throw ParameterError("tau must lie in (0, 1]");
  const double alpha = -mu / sigma;
  const double beta = (1.0 - mu) / sigma;
  const double shift = sigma * theta;
  const double log_k = log_normal_mass(alpha + shift, beta + shift) - log_normal_mass(alpha, beta);
  TruncatedGaussianCheck out;
  out.threshold = (1.0 - tau) + theta * sigma * sigma / 2.0 + log_k / theta;
  out.margin = mu - out.threshold;
  out.satisfied = out.margin > 0.0;
  return out;
}

double dual_gap(const LossSample& sample, double theta, const std::vector<double>& q) {
  check_theta(theta);
  sample.validate();
  if (q.size() != sample.losses.size()) throw ShapeError("q must match the sample length");
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] >= 0.0) || !std::isfinite(q[i])) throw ParameterError("q must be nonnegative");
    if (q[i] > 0.0 && sample.weights[i] == 0.0) {
      throw ParameterError("q is not absolutely continuous with respect to the weights");
    }
    sum += q[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("q must sum to 1");

  double expected = 0.0;
  double kl = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    expected += q[i] * sample.losses[i];
    kl += q[i] * std::log(q[i] / sample.weights[i]);
  }
  return entropic_risk(sample, theta) - (expected - kl / theta);
}

}  // namespace entrocf
