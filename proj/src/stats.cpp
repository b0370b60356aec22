#include "sparsagg/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sparsagg/error.hpp"

namespace sparsagg {

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double p) {
  require(!values.empty(), ErrorKind::validation, "quantile of an empty sample");
  require(p >= 0.0 && p <= 1.0, ErrorKind::config, "quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

LineFit ols(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::shape, "x and y differ in length");
  require(x.size() >= 2, ErrorKind::validation, "a line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 1e-12 * std::max(1.0, mx * mx) * n, ErrorKind::validation, "x values have no spread");
  LineFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - fit.intercept - fit.slope * x[i];
      ssr += e * e;
    }
    fit.stderr_slope = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

double binomial_cdf(std::size_t k, std::size_t trials, double p) {
  require(p >= 0.0 && p <= 1.0, ErrorKind::config, "probability must lie in [0, 1]");
  if (k >= trials || p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  const double nn = static_cast<double>(trials);
  double total = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double di = static_cast<double>(i);
    const double log_term = std::lgamma(nn + 1.0) - std::lgamma(di + 1.0) - std::lgamma(nn - di + 1.0) +
                            di * std::log(p) + (nn - di) * std::log1p(-p);
    total += std::exp(log_term);
  }
  return std::min(1.0, total);
}

std::size_t binomial_upper_quantile(std::size_t trials, double p, double level) {
  require(level > 0.0 && level < 1.0, ErrorKind::config, "confidence level must lie in (0, 1)");
  for (std::size_t k = 0; k < trials; ++k) {
    if (binomial_cdf(k, trials, p) >= level) return k;
  }
  return trials;
}

}  // namespace sparsagg
