#pragma once

#include <Eigen/Dense>
#include <optional>

#include "sparsagg/dictionary.hpp"
#include "sparsagg/measure.hpp"

namespace sparsagg {

/// L2(mu) integrals of a dictionary under a design measure.
///
/// One-dimensional dictionaries are integrated with the measure's trapezoid
/// rule. Coordinate dictionaries use closed-form moments of the uniform
/// measure on their box, since a tensor grid is out of reach for d > 3.
class Population {
 public:
  Population(Dictionary dict, MeasureSpec measure);

  const Dictionary& dictionary() const { return dict_; }
  const MeasureSpec& measure() const { return measure_; }

  /// Psi_M, symmetric by construction.
  const Eigen::MatrixXd& gram() const { return gram_; }

  /// ||f_j|| for each j.
  Eigen::VectorXd norms() const { return gram_.diagonal().cwiseMax(0.0).cwiseSqrt(); }

  /// max_{i,j} E[f_i^2(X) f_j^2(X)].
  double fourth_moment() const { return fourth_moment_; }

  /// max_j ||f_j||_inf; a grid lower bound except for the coordinate kind.
  double sup_bound() const { return sup_bound_; }
  std::size_t sup_grid_points() const { return sup_grid_points_; }

  /// Quadrature rule and basis values on its nodes (one-dimensional only).
  const Quadrature* quadrature() const { return quadrature_ ? &*quadrature_ : nullptr; }
  const Eigen::MatrixXd& basis_on_nodes() const { return basis_on_nodes_; }

  /// E[X X^T] for the coordinate kind (d x d).
  const Eigen::MatrixXd& second_moments() const { return second_moments_; }

  /// Sup-norm evaluation grid (d = 1): dense grid, quadrature nodes and,
  /// for tabulated dictionaries, every table knot inside the domain.
  Eigen::VectorXd sup_points() const;

 private:
  void integrate_one_dimensional();
  void integrate_coordinate();

  Dictionary dict_;
  MeasureSpec measure_;
  Eigen::MatrixXd gram_;
  double fourth_moment_ = 0.0;
  double sup_bound_ = 0.0;
  std::size_t sup_grid_points_ = 0;
  std::optional<Quadrature> quadrature_;
  Eigen::MatrixXd basis_on_nodes_;
  Eigen::MatrixXd second_moments_;
};

}  // namespace sparsagg
