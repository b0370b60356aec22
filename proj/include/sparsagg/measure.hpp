#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "sparsagg/random.hpp"

namespace sparsagg {

/// Axis-aligned box in R^d. Every dictionary lives on one.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box unit(std::size_t dim);
  static Box interval(double lo, double hi);

  std::size_t dim() const { return lower.size(); }
  double volume() const;
  bool is_unit() const;
  bool contains(std::span<const double> x) const;
  void validate() const;

  friend bool operator==(const Box&, const Box&) = default;
};

enum class MeasureKind { uniform, grid_density };

/// Design distribution mu on a box. `grid_density` carries density values at
/// equispaced abscissae spanning a one-dimensional domain, interpolated
/// linearly and normalized to integrate to one.
struct MeasureSpec {
  MeasureKind kind = MeasureKind::uniform;
  Box domain = Box::unit(1);
  std::vector<double> density;
  double mu_min = 1.0;
  double mu_max = 1.0;
  std::size_t resolution = 4096;  // quadrature points per axis

  static MeasureSpec uniform(Box domain = Box::unit(1), std::size_t resolution = 4096);
  static MeasureSpec grid_density(std::vector<double> values, Box domain = Box::unit(1),
                                  std::size_t resolution = 4096);

  void validate() const;
  double density_at(double x) const;
};

/// Composite trapezoid rule for a one-dimensional measure. Weights already
/// include the density and sum to one.
struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  double integrate(const Eigen::VectorXd& values) const { return weights.dot(values); }
};

Quadrature make_quadrature(const MeasureSpec& measure);

/// n i.i.d. draws from mu, one point per row.
Eigen::MatrixXd sample_points(const MeasureSpec& measure, std::size_t n, Rng& rng);

/// Dense grid used for sup-norm estimates (d = 1): `count` equispaced points
/// plus the quadrature nodes, so grid sups dominate quadrature averages.
Eigen::VectorXd sup_grid(const MeasureSpec& measure, std::size_t count = 100000);

}  // namespace sparsagg
