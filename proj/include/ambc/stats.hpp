#pragma once

#include <span>
#include <utility>
#include <vector>

namespace ambc {

struct CdfPoint {
  double value;
  double probability;  // fraction of samples <= value
};

/// Empirical CDF at each distinct sample value, in increasing order.
std::vector<CdfPoint> empirical_cdf(std::span<const double> samples);

/// Smallest sample x with F(x) >= q. `samples` need not be sorted.
double empirical_quantile(std::span<const double> samples, double q);

struct KsResult {
  double statistic;
  double p_value;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace ambc
