#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dchlab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Two-sided p-value for a standard normal statistic.
inline double normal_two_sided_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

// Regularized upper incomplete gamma Q(a, x), for chi-square tails.
// Series for x < a+1, continued fraction otherwise (Lentz).
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) return kNaN;
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Upper tail of the chi-square distribution with df degrees of freedom.
inline double chi_square_upper_p(double x, int df) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

// Numerically stable softmax of lambda * values.
inline std::vector<double> softmax(const std::vector<double>& values, double lambda) {
  std::vector<double> out(values.size());
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, lambda * v);
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(lambda * values[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

// Uniform distribution over the argmax set, with absolute tie tolerance.
inline std::vector<double> argmax_uniform(const std::vector<double>& values, double tol) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  std::vector<double> out(values.size(), 0.0);
  int hits = 0;
  for (size_t i = 0; i < values.size(); ++i)
    if (values[i] >= m - tol) ++hits;
  for (size_t i = 0; i < values.size(); ++i)
    if (values[i] >= m - tol) out[i] = 1.0 / hits;
  return out;
}

}  // namespace dchlab
