#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dchlab/math_util.hpp"

namespace dchlab {

// Distribution over cognitive levels 0..k_max, renormalized after truncation.
// The Poisson constructor truncates at the smallest K whose pre-truncation CDF
// reaches 1 - 1e-10, capped at 64; thresholds only ever consume mass ratios,
// which the renormalization leaves untouched.
struct LevelPrior {
  std::vector<double> masses;        // p_0..p_K, sums to 1
  double tau = kNaN;                 // set when Poisson

  static constexpr int kDefaultCap = 64;
  static constexpr double kTailEps = 1e-10;

  static LevelPrior poisson(double tau, int cap = kDefaultCap) {
    if (tau < 0.0 || !std::isfinite(tau)) throw std::invalid_argument("Poisson rate must be finite and >= 0");
    LevelPrior lp;
    lp.tau = tau;
    if (tau == 0.0) {
      lp.masses = {1.0};
      return lp;
    }
    double cdf = 0.0;
    for (int k = 0; k <= cap; ++k) {
      double m = std::exp(-tau + k * std::log(tau) - std::lgamma(k + 1.0));
      lp.masses.push_back(m);
      cdf += m;
      if (cdf >= 1.0 - kTailEps) break;
    }
    double sum = 0.0;
    for (double m : lp.masses) sum += m;
    for (double& m : lp.masses) m /= sum;
    return lp;
  }

  static LevelPrior from_masses(std::vector<double> ms) {
    if (ms.empty()) throw std::invalid_argument("level prior needs at least one mass");
    double sum = 0.0;
    for (double m : ms) {
      if (!(m > 0.0)) throw std::invalid_argument("level masses must be strictly positive");
      sum += m;
    }
    for (double& m : ms) m /= sum;
    LevelPrior lp;
    lp.masses = std::move(ms);
    return lp;
  }

  int k_max() const { return static_cast<int>(masses.size()) - 1; }

  // Mass on levels 0..m.
  double cumulative(int m) const {
    double s = 0.0;
    for (int j = 0; j <= m && j <= k_max(); ++j) s += masses[j];
    return s;
  }

  // Mass on strategic levels 1..m.
  double positive_tail(int m) const {
    double s = 0.0;
    for (int j = 1; j <= m && j <= k_max(); ++j) s += masses[j];
    return s;
  }

  // Truncated rational expectations: level-k prior over opponent levels < k.
  std::vector<double> truncated(int k) const {
    if (k < 1) throw std::invalid_argument("truncated prior requires level >= 1");
    std::vector<double> out(std::min(k, k_max() + 1));
    double denom = cumulative(k - 1);
    for (size_t l = 0; l < out.size(); ++l) out[l] = masses[l] / denom;
    return out;
  }
};

// Cumulative quantities the dirty-faces closed forms are written in.
struct HierarchyMass {
  const LevelPrior& prior;

  explicit HierarchyMass(const LevelPrior& p) : prior(p) {}

  double p0() const { return prior.masses[0]; }
  double cumulative(int m) const { return prior.cumulative(m); }
  double strategic_sum(int m) const { return prior.positive_tail(m); }

  // Three-person wait ratio (1/4 p0 + sum) / (1/2 p0 + sum) over levels 1..k-1.
  double gamma(int k) const {
    if (k < 2) throw std::invalid_argument("gamma is defined for k >= 2");
    double s = strategic_sum(k - 1);
    return (0.25 * p0() + s) / (0.5 * p0() + s);
  }
};

}  // namespace dchlab
