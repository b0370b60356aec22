#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sparsagg/dictionary.hpp"
#include "sparsagg/measure.hpp"
#include "sparsagg/population.hpp"

namespace sparsagg {

enum class TruthKind { fourier_series, linear, tabulated };

/// Regression function f with optional class tags.
class TruthSpec {
 public:
  /// f = sum_j theta[j-1] f_j over the Fourier basis on [0, 1].
  static TruthSpec fourier(std::vector<double> theta);
  /// Sparse Fourier coefficients as (1-based index, value) pairs.
  static TruthSpec fourier_sparse(const std::vector<std::pair<std::size_t, double>>& entries);
  /// theta_j = scale (-1)^(j+1) j^-(beta + 0.6) for j <= terms, which lies in
  /// the Sobolev ellipsoid of smoothness beta.
  static TruthSpec sobolev(double beta, double scale, std::size_t terms);
  /// f(x) = coefficients . x on a box in R^d.
  static TruthSpec linear(Eigen::VectorXd coefficients, Box domain);
  static TruthSpec tabulated(Table table, Box domain = Box::unit(1));

  /// Parses `fourier:<j>:<v>,<j>:<v>,...`, `sobolev:<beta>[:<scale>[:<terms>]]`,
  /// `linear:<v1>,<v2>,...` (unit cube) or `tabulated:<csv with x,f>`.
  static TruthSpec parse(const std::string& text);

  TruthKind kind() const { return kind_; }
  const std::vector<double>& theta() const { return theta_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const Box& domain() const { return domain_; }

  double value(std::span<const double> x) const;
  Eigen::VectorXd values(const Eigen::MatrixXd& points) const;

  /// Number of nonzero Fourier coefficients.
  std::size_t nonzero_count() const;

  // Class tags. validate_tags() checks each one that is set.
  std::optional<std::size_t> l0_k;
  std::optional<double> l1_budget;
  std::optional<std::pair<double, double>> sobolev_class;  // (beta, Q)
  void validate_tags() const;

 private:
  TruthKind kind_ = TruthKind::fourier_series;
  std::vector<double> theta_;
  Eigen::VectorXd coefficients_;
  Table table_;
  Box domain_ = Box::unit(1);
};

/// Population quantities of a truth relative to a dictionary. Holds a
/// reference to `population`, which must outlive it.
class Target {
 public:
  Target(const Population& population, TruthSpec truth);

  const Population& population() const { return *population_; }
  const TruthSpec& truth() const { return truth_; }

  /// <f_j, f> for each dictionary function.
  const Eigen::VectorXd& cross() const { return cross_; }
  /// ||f||^2.
  double truth_norm2() const { return truth_norm2_; }

  /// ||f_lambda - f||^2 in L2(mu).
  double dist2(const Eigen::VectorXd& coefficients) const;
  /// L(lambda) = ||f - f_lambda||_inf (grid estimate for d = 1).
  double sup_distance(const Eigen::VectorXd& coefficients) const;
  /// L_* = ||f||_inf.
  double truth_sup() const;

  /// f on the quadrature nodes (d = 1).
  const Eigen::VectorXd& truth_on_nodes() const { return truth_on_nodes_; }

 private:
  const Population* population_;
  TruthSpec truth_;
  Eigen::VectorXd cross_;
  double truth_norm2_ = 0.0;
  Eigen::VectorXd truth_on_nodes_;
  Eigen::VectorXd padded_;  // linear truth: coefficient vector in R^d
};

}  // namespace sparsagg
