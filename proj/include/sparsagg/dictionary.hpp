#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsagg/measure.hpp"

namespace sparsagg {

enum class DictionaryKind { fourier, coordinate, tabulated };

/// Piecewise-linear function given by strictly increasing abscissae.
/// Evaluation outside the table range clamps to the end values.
struct Table {
  std::vector<double> x;
  std::vector<double> y;

  void validate() const;
  double operator()(double t) const;
  bool covers(double t) const { return t >= x.front() && t <= x.back(); }
};

/// Value of the 1-based Fourier basis function on [0, 1]:
/// f_1 = 1, f_{2k} = sqrt(2) cos(2 pi k x), f_{2k+1} = sqrt(2) sin(2 pi k x).
double fourier_basis(std::size_t index, double x);

/// f_j(X_i) for all design points, one row per point.
struct DesignMatrix {
  Eigen::MatrixXd values;
  std::size_t clamped_points = 0;  // tabulated kind: points outside some table range

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// An ordered family f_1..f_M of real functions on a box. Immutable once
/// built; all evaluation is const.
class Dictionary {
 public:
  static Dictionary fourier(std::size_t count, Box domain = Box::unit(1), bool affine_map = false);
  static Dictionary coordinate(std::size_t dim, std::size_t count, Box domain);
  static Dictionary coordinate(std::size_t dim, std::size_t count) {
    return coordinate(dim, count, Box::unit(dim));
  }
  static Dictionary tabulated(std::vector<Table> tables, Box domain = Box::unit(1));

  DictionaryKind kind() const { return kind_; }
  std::size_t size() const { return count_; }
  std::size_t dim() const { return domain_.dim(); }
  const Box& domain() const { return domain_; }
  const std::vector<Table>& tables() const { return tables_; }

  /// f_j(x) with 0-based j.
  double value(std::size_t j, std::span<const double> x) const;

  /// Entry (i, j) = f_j(points.row(i)).
  DesignMatrix evaluate(const Eigen::MatrixXd& points) const;

  /// f_lambda at each point.
  Eigen::VectorXd combine(const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& points) const;

 private:
  Dictionary(DictionaryKind kind, std::size_t count, Box domain)
      : kind_(kind), count_(count), domain_(std::move(domain)) {}

  double to_unit(double x) const;

  DictionaryKind kind_;
  std::size_t count_;
  Box domain_;
  bool affine_map_ = false;
  std::vector<Table> tables_;
};

Dictionary build_fourier(std::size_t count);

/// Tabulated dictionary from CSV with header `x,f1,...,fM`.
Dictionary load_tabulated_csv(const std::filesystem::path& path, std::optional<Box> domain = {});

/// Parses `fourier:<M>`, `coordinate:<d>` or `tabulated:<path>`.
Dictionary parse_dictionary(const std::string& shorthand);

/// sqrt(n^-1 sum_i entry(i, j)^2) for each column.
Eigen::VectorXd empirical_norms(const DesignMatrix& design);

struct DictionaryValidation {
  double sup_bound = 0.0;     // L, grid estimate (lower bound on the true sup)
  double min_norm = 0.0;      // c0
  double fourth_moment = 0.0; // L0
  std::size_t sup_grid_points = 0;
  bool bounded = false;                // sup_bound <= max_sup
  bool norms_bounded_below = false;    // min_norm > threshold
  bool fourth_moment_bounded = false;  // fourth_moment <= max

  bool satisfied() const {
    return bounded && norms_bounded_below && fourth_moment_bounded && sup_bound >= min_norm &&
           min_norm > 0.0;
  }
};

struct ValidationThresholds {
  double max_sup = std::numeric_limits<double>::infinity();
  double min_norm = 0.0;  // c0 must exceed this
  double max_fourth_moment = std::numeric_limits<double>::infinity();
};

DictionaryValidation validate_a2(const Dictionary& dict, const MeasureSpec& measure,
                                 const ValidationThresholds& thresholds = {});

}  // namespace sparsagg
