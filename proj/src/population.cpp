#include "sparsagg/population.hpp"

#include <algorithm>
#include <cmath>

#include "sparsagg/error.hpp"

namespace sparsagg {

Population::Population(Dictionary dict, MeasureSpec measure)
    : dict_(std::move(dict)), measure_(std::move(measure)) {
  measure_.validate();
  require(measure_.domain == dict_.domain(), ErrorKind::config,
          "measure and dictionary are defined on different domains");
  if (dict_.kind() == DictionaryKind::coordinate) {
    integrate_coordinate();
  } else {
    integrate_one_dimensional();
  }
  require(gram_.allFinite() && std::isfinite(fourth_moment_), ErrorKind::numeric,
          "population integrals are not finite");
}

Eigen::VectorXd Population::sup_points() const {
  Eigen::VectorXd grid = sup_grid(measure_);
  if (dict_.kind() != DictionaryKind::tabulated) return grid;
  std::vector<double> knots;
  const double lo = measure_.domain.lower[0];
  const double hi = measure_.domain.upper[0];
  for (const auto& t : dict_.tables()) {
    for (double x : t.x) {
      if (x >= lo && x <= hi) knots.push_back(x);
    }
  }
  Eigen::VectorXd all(grid.size() + static_cast<Eigen::Index>(knots.size()));
  all.head(grid.size()) = grid;
  for (std::size_t k = 0; k < knots.size(); ++k) all[grid.size() + static_cast<Eigen::Index>(k)] = knots[k];
  return all;
}

void Population::integrate_one_dimensional() {
  quadrature_ = make_quadrature(measure_);
  basis_on_nodes_ = dict_.evaluate(quadrature_->nodes).values;
  const auto& w = quadrature_->weights;

  gram_ = basis_on_nodes_.transpose() * w.asDiagonal() * basis_on_nodes_;
  gram_ = 0.5 * (gram_ + gram_.transpose()).eval();

  const Eigen::MatrixXd squares = basis_on_nodes_.cwiseAbs2();
  const Eigen::MatrixXd fourth = squares.transpose() * w.asDiagonal() * squares;
  fourth_moment_ = fourth.maxCoeff();

  const Eigen::VectorXd grid = sup_points();
  sup_grid_points_ = static_cast<std::size_t>(grid.size());
  double sup = 0.0;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double x = grid[k];
    for (std::size_t j = 0; j < dict_.size(); ++j) {
      sup = std::max(sup, std::abs(dict_.value(j, std::span<const double>(&x, 1))));
    }
  }
  sup_bound_ = sup;
}

void Population::integrate_coordinate() {
  require(measure_.kind == MeasureKind::uniform, ErrorKind::unsupported,
          "coordinate dictionaries support the uniform design measure only");
  const auto d = static_cast<Eigen::Index>(dict_.dim());
  const auto m = static_cast<Eigen::Index>(dict_.size());
  const auto& box = measure_.domain;

  Eigen::VectorXd mean(d), second(d), fourth(d);
  double sup = 0.0;
  for (Eigen::Index a = 0; a < d; ++a) {
    const double lo = box.lower[static_cast<std::size_t>(a)];
    const double hi = box.upper[static_cast<std::size_t>(a)];
    mean[a] = 0.5 * (lo + hi);
    second[a] = (lo * lo + lo * hi + hi * hi) / 3.0;
    fourth[a] = (std::pow(hi, 5) - std::pow(lo, 5)) / (5.0 * (hi - lo));
    if (a < m) sup = std::max({sup, std::abs(lo), std::abs(hi)});
  }
  second_moments_ = mean * mean.transpose();
  second_moments_.diagonal() = second;

  gram_ = second_moments_.topLeftCorner(m, m);
  double l0 = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      l0 = std::max(l0, i == j ? fourth[i] : second[i] * second[j]);
    }
  }
  fourth_moment_ = l0;
  sup_bound_ = sup;
  sup_grid_points_ = 0;
}

}  // namespace sparsagg
