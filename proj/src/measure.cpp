#include "sparsagg/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsagg/error.hpp"

namespace sparsagg {

Box Box::unit(std::size_t dim) {
  return Box{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

Box Box::interval(double lo, double hi) { return Box{{lo}, {hi}}; }

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
  return v;
}

bool Box::is_unit() const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (lower[i] != 0.0 || upper[i] != 1.0) return false;
  }
  return true;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return true;
}

void Box::validate() const {
  require(dim() >= 1 && lower.size() == upper.size(), ErrorKind::shape,
          "box must have matching lower/upper bounds of dimension >= 1");
  for (std::size_t i = 0; i < dim(); ++i) {
    require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i],
            ErrorKind::config, "box bounds must be finite with lower < upper");
  }
}

MeasureSpec MeasureSpec::uniform(Box domain, std::size_t resolution) {
  MeasureSpec m;
  m.kind = MeasureKind::uniform;
  m.domain = std::move(domain);
  m.domain.validate();
  m.mu_min = m.mu_max = 1.0 / m.domain.volume();
  m.resolution = resolution;
  m.validate();
  return m;
}

MeasureSpec MeasureSpec::grid_density(std::vector<double> values, Box domain,
                                      std::size_t resolution) {
  domain.validate();
  require(domain.dim() == 1, ErrorKind::unsupported,
          "grid densities are supported on one-dimensional domains only");
  require(values.size() >= 2, ErrorKind::config, "density grid needs at least two values");
  for (double v : values) {
    require(std::isfinite(v) && v > 0.0, ErrorKind::config,
            "density values must be finite and strictly positive");
  }
  // Normalize so the piecewise-linear density integrates to one.
  const double h = domain.volume() / static_cast<double>(values.size() - 1);
  double mass = 0.0;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) mass += 0.5 * h * (values[k] + values[k + 1]);
  for (double& v : values) v /= mass;

  MeasureSpec m;
  m.kind = MeasureKind::grid_density;
  m.domain = std::move(domain);
  m.mu_min = *std::min_element(values.begin(), values.end());
  m.mu_max = *std::max_element(values.begin(), values.end());
  m.density = std::move(values);
  m.resolution = resolution;
  m.validate();
  return m;
}

void MeasureSpec::validate() const {
  domain.validate();
  require(resolution >= 64, ErrorKind::config, "quadrature resolution must be at least 64");
  require(mu_min > 0.0 && mu_min <= mu_max && std::isfinite(mu_max), ErrorKind::config,
          "density bounds must satisfy 0 < mu_min <= mu_max < inf");
  if (kind == MeasureKind::grid_density) {
    require(domain.dim() == 1 && density.size() >= 2, ErrorKind::config,
            "grid density needs a one-dimensional domain and at least two values");
  }
}

double MeasureSpec::density_at(double x) const {
  if (kind == MeasureKind::uniform) return 1.0 / domain.volume();
  const double lo = domain.lower[0];
  const double hi = domain.upper[0];
  const double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0) * static_cast<double>(density.size() - 1);
  const auto k = std::min(static_cast<std::size_t>(t), density.size() - 2);
  const double frac = t - static_cast<double>(k);
  return density[k] + frac * (density[k + 1] - density[k]);
}

Quadrature make_quadrature(const MeasureSpec& measure) {
  measure.validate();
  require(measure.domain.dim() == 1, ErrorKind::unsupported,
          "quadrature grids are implemented for one-dimensional domains");
  const std::size_t g = measure.resolution;
  const double lo = measure.domain.lower[0];
  const double hi = measure.domain.upper[0];
  const double h = (hi - lo) / static_cast<double>(g - 1);

  Quadrature q;
  q.nodes.resize(static_cast<Eigen::Index>(g));
  q.weights.resize(static_cast<Eigen::Index>(g));
  double total = 0.0;
  for (std::size_t k = 0; k < g; ++k) {
    const double x = (k + 1 == g) ? hi : lo + h * static_cast<double>(k);
    const double end_factor = (k == 0 || k + 1 == g) ? 0.5 : 1.0;
    const auto i = static_cast<Eigen::Index>(k);
    q.nodes[i] = x;
    q.weights[i] = end_factor * h * measure.density_at(x);
    total += q.weights[i];
  }
  // The trapezoid mass of a linear density is exact; renormalizing removes
  // the O(h^2) error for smooth user densities and rounding otherwise.
  q.weights /= total;
  return q;
}

namespace {

// Inverse CDF of the piecewise-linear density within one cell.
double invert_cell(double p0, double p1, double width, double mass_needed) {
  const double slope = (p1 - p0) / width;
  if (std::abs(slope) * width < 1e-12 * std::max(p0, p1)) return mass_needed / p0;
  // p0 t + slope t^2 / 2 = mass_needed
  const double disc = p0 * p0 + 2.0 * slope * mass_needed;
  const double t = 2.0 * mass_needed / (p0 + std::sqrt(std::max(disc, 0.0)));
  return std::clamp(t, 0.0, width);
}

}  // namespace

Eigen::MatrixXd sample_points(const MeasureSpec& measure, std::size_t n, Rng& rng) {
  const auto d = measure.domain.dim();
  Eigen::MatrixXd points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  if (measure.kind == MeasureKind::uniform) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      for (std::size_t a = 0; a < d; ++a) {
        points(i, static_cast<Eigen::Index>(a)) =
            rng.uniform(measure.domain.lower[a], measure.domain.upper[a]);
      }
    }
    return points;
  }

  const auto& dens = measure.density;
  const double lo = measure.domain.lower[0];
  const double h = measure.domain.volume() / static_cast<double>(dens.size() - 1);
  std::vector<double> cdf(dens.size(), 0.0);
  for (std::size_t k = 0; k + 1 < dens.size(); ++k) {
    cdf[k + 1] = cdf[k] + 0.5 * h * (dens[k] + dens[k + 1]);
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto k = static_cast<std::size_t>(std::distance(cdf.begin(), it));
    k = std::clamp<std::size_t>(k, 1, dens.size() - 1) - 1;
    const double t = invert_cell(dens[k], dens[k + 1], h, u - cdf[k]);
    points(i, 0) = lo + h * static_cast<double>(k) + t;
  }
  return points;
}

Eigen::VectorXd sup_grid(const MeasureSpec& measure, std::size_t count) {
  require(measure.domain.dim() == 1, ErrorKind::unsupported,
          "sup-norm grids are implemented for one-dimensional domains");
  const Quadrature q = make_quadrature(measure);
  const double lo = measure.domain.lower[0];
  const double hi = measure.domain.upper[0];
  Eigen::VectorXd grid(static_cast<Eigen::Index>(count) + q.nodes.size());
  for (std::size_t k = 0; k < count; ++k) {
    grid[static_cast<Eigen::Index>(k)] =
        lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  grid.tail(q.nodes.size()) = q.nodes;
  return grid;
}

}  // namespace sparsagg
