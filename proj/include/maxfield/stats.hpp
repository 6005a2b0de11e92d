#pragma once

// Small statistics toolkit: normal CDF, running moments, Monte Carlo estimates
// with standard errors, and the Kolmogorov-Smirnov distance for goodness of
// fit checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "maxfield/errors.hpp"

namespace maxfield {

// Standard normal CDF via the complementary error function.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);  // x / sqrt(2)
}

inline double normal_pdf(double x) {
  return 0.3989422804014326779 * std::exp(-0.5 * x * x);  // 1/sqrt(2*pi)
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

// Welford accumulator.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  double stddev() const { return std::sqrt(variance()); }
  double stderr_of_mean() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }
  MonteCarloEstimate estimate() const { return {mean(), stderr_of_mean()}; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Mean and standard error from sums accumulated elsewhere (e.g. in disjoint
// parallel slots).  `sum` and `sum_sq` are over n terms.
inline MonteCarloEstimate estimate_from_sums(double sum, double sum_sq,
                                             std::size_t n) {
  double dn = static_cast<double>(n);
  double mean = sum / dn;
  double var = n > 1 ? std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1.0))
                     : 0.0;
  return {mean, std::sqrt(var / dn)};
}

// Kolmogorov-Smirnov statistic sup_x |F_n(x) - F(x)| against a reference CDF.
// Samples need not be sorted.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    double lo = static_cast<double>(i) / n;
    double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
  }
  return d;
}

// Asymptotic critical value at level alpha: sqrt(-log(alpha/2)/2) / sqrt(n).
inline double ks_critical(std::size_t n, double alpha) {
  if (n == 0 || alpha <= 0.0 || alpha >= 1.0)
    throw DomainError("ks_critical: need n > 0 and alpha in (0,1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) /
         std::sqrt(static_cast<double>(n));
}

}  // namespace maxfield
