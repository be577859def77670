#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "entrocf/risk.hpp"
#include "entrocf/seed.hpp"

namespace entrocf {

namespace {

LossSample random_sample(std::mt19937_64& rng, int n, bool uniform_weights) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> losses(static_cast<std::size_t>(n));
  for (double& l : losses) l = u01(rng);
  if (uniform_weights) return LossSample::uniform(std::move(losses));
  LossSample s;
  s.losses = std::move(losses);
  s.weights.resize(static_cast<std::size_t>(n));
  double z = 0.0;
  for (double& w : s.weights) z += (w = 0.05 + u01(rng));
  for (double& w : s.weights) w /= z;
  return s;
}

double random_theta(std::mt19937_64& rng) {
  // log-uniform over [1e-2, 1e2]
  std::uniform_real_distribution<double> e(-2.0, 2.0);
  return std::pow(10.0, e(rng));
}

struct Tracker {
  PropertyCheck check;
  explicit Tracker(std::string name) {
    check.name = std::move(name);
    check.passed = true;
  }
  // Records `violation`; anything above `tolerance` fails the check.
  void observe(double violation, double tolerance) {
    check.worst = std::max(check.worst, violation);
    if (!(violation <= tolerance)) check.passed = false;
  }
  PropertyCheck done(double tolerance) {
    std::ostringstream os;
    os.precision(3);
    os << "worst violation " << check.worst << " (tolerance " << tolerance << ")";
    check.detail = os.str();
    return check;
  }
};

}  // namespace

std::vector<PropertyCheck> verify_risk_properties(std::uint64_t seed, int trials) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 12);
  std::vector<PropertyCheck> out;

  {
    Tracker t("monotonicity");
    for (int k = 0; k < trials; ++k) {
      auto a = random_sample(rng, size(rng), k % 2 == 0);
      auto b = a;
      for (double& l : b.losses) l += 0.3 * u01(rng);
      const double theta = random_theta(rng);
      t.observe(entropic_risk(a, theta) - entropic_risk(b, theta), 1e-12);
    }
    out.push_back(t.done(1e-12));
  }
  {
    Tracker t("translation_invariance");
    for (int k = 0; k < trials; ++k) {
      auto a = random_sample(rng, size(rng), k % 2 == 0);
      const double alpha = 2.0 * u01(rng) - 1.0;
      auto b = a;
      for (double& l : b.losses) l += alpha;
      const double theta = random_theta(rng);
      t.observe(std::abs(entropic_risk(b, theta) - entropic_risk(a, theta) - alpha), 1e-10);
    }
    out.push_back(t.done(1e-10));
  }
  {
    Tracker t("convexity");
    for (int k = 0; k < trials; ++k) {
      auto a = random_sample(rng, size(rng), k % 2 == 0);
      auto b = a;
      for (double& l : b.losses) l = u01(rng);
      const double theta = random_theta(rng);
      const double ra = entropic_risk(a, theta), rb = entropic_risk(b, theta);
      for (int g = 0; g <= 10; ++g) {
        const double w = g / 10.0;
        auto mix = a;
        for (std::size_t i = 0; i < mix.losses.size(); ++i)
          mix.losses[i] = w * a.losses[i] + (1.0 - w) * b.losses[i];
        t.observe(entropic_risk(mix, theta) - (w * ra + (1.0 - w) * rb), 1e-12);
      }
    }
    out.push_back(t.done(1e-12));
  }
  {
    Tracker t("mean_max_bounds");
    for (int k = 0; k < trials; ++k) {
      auto a = random_sample(rng, size(rng), k % 2 == 0);
      const double theta = random_theta(rng);
      double mean = 0.0, mx = -1e300;
      for (std::size_t i = 0; i < a.losses.size(); ++i) {
        mean += a.weights[i] * a.losses[i];
        mx = std::max(mx, a.losses[i]);
      }
      const double r = entropic_risk(a, theta);
      t.observe(std::max(mean - r, r - mx), 1e-12);
    }
    out.push_back(t.done(1e-12));
  }
  {
    Tracker t("nondecreasing_in_theta");
    for (int k = 0; k < trials / 10; ++k) {
      auto a = random_sample(rng, size(rng), k % 2 == 0);
      double prev = -1e300;
      for (int e = -6; e <= 4; ++e) {
        const double r = entropic_risk(a, std::pow(10.0, e));
        t.observe(prev - r, 1e-12);
        prev = r;
      }
    }
    out.push_back(t.done(1e-12));
  }
  {
    Tracker t("worst_case_limit");
    for (int k = 0; k < trials / 10; ++k) {
      auto a = random_sample(rng, 10, true);
      const double mx = *std::max_element(a.losses.begin(), a.losses.end());
      for (double theta : {1e2, 1e3, 1e4}) {
        t.observe(std::abs(entropic_risk(a, theta) - mx) - std::log(10.0) / theta, 1e-12);
      }
    }
    // The bound is attained when one loss dominates, so allow rounding.
    out.push_back(t.done(1e-12));
  }
  {
    Tracker t("mean_limit");
    for (int k = 0; k < trials / 10; ++k) {
      auto a = random_sample(rng, 10, k % 2 == 0);
      double mean = 0.0;
      for (std::size_t i = 0; i < a.losses.size(); ++i) mean += a.weights[i] * a.losses[i];
      t.observe(std::abs(entropic_risk(a, 1e-6) - mean), 1e-4);
    }
    out.push_back(t.done(1e-4));
  }
  {
    Tracker t("dual_gap_at_tilt");
    for (int k = 0; k < trials; ++k) {
      auto a = random_sample(rng, size(rng), k % 2 == 0);
      const double theta = random_theta(rng);
      t.observe(std::abs(dual_gap(a, theta, exponential_tilt(a, theta))), 1e-10);
    }
    out.push_back(t.done(1e-10));
  }
  {
    Tracker t("dual_gap_nonnegative");
    for (int k = 0; k < trials; ++k) {
      auto a = random_sample(rng, size(rng), k % 2 == 0);
      const double theta = random_theta(rng);
      std::vector<double> q(a.losses.size());
      double z = 0.0;
      for (double& v : q) z += (v = u01(rng));
      for (double& v : q) v /= z;
      t.observe(-dual_gap(a, theta, q), 1e-12);
    }
    out.push_back(t.done(1e-12));
  }
  {
    Tracker t("risk_gradient_vs_central_differences");
    const int cases = std::max(1, trials / 10);
    const std::vector<int> hidden = {16, 16};
    for (int k = 0; k < cases; ++k) {
      const int d = 2 + k % 5;
      std::vector<MlpModel> models;
      for (int i = 0; i < 3; ++i)
        models.push_back(MlpModel::random(d, hidden, derive_seed(seed, 1000 + k * 3 + i)));
      Ensemble ens(std::move(models), 0);
      Vector x(d);
      for (int j = 0; j < d; ++j) x(j) = u01(rng);
      const double theta = random_theta(rng);
      const Vector g = ensemble_risk_gradient(ens, x, theta);
      Vector fd(d);
      const double h = 1e-5;
      for (int j = 0; j < d; ++j) {
        Vector xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        fd(j) = (ensemble_risk(ens, xp, theta) - ensemble_risk(ens, xm, theta)) / (2.0 * h);
      }
      const double scale = std::max(fd.norm(), 1e-8);
      t.observe((g - fd).norm() / scale, 1e-4);
    }
    out.push_back(t.done(1e-4));
  }
  return out;
}

}  // namespace entrocf
