#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mkvldp {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  std::size_t count = 0;
  double std_error() const;
};

MeanVar mean_var(std::span<const double> x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov survival function Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Wilson score interval for a binomial proportion, z standard normal quantile.
Interval wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

/// Upper tail of the standard normal, P(Z >= x).
double normal_upper_tail(double x);

}  // namespace mkvldp
