#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sparsagg {

double median(std::vector<double> values);

/// Linear-interpolation quantile (type 7), p in [0, 1].
double quantile(std::vector<double> values, double p);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope x.
LineFit ols(std::span<const double> x, std::span<const double> y);

double binomial_cdf(std::size_t k, std::size_t trials, double p);

/// Smallest k with P(Binomial(trials, p) <= k) >= level.
std::size_t binomial_upper_quantile(std::size_t trials, double p, double level = 0.95);

}  // namespace sparsagg
