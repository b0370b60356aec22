#include "sparsagg/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sparsagg/csv.hpp"
#include "sparsagg/error.hpp"
#include "sparsagg/population.hpp"

namespace sparsagg {

void Table::validate() const {
  require(x.size() == y.size(), ErrorKind::shape, "table abscissae and values differ in length");
  require(x.size() >= 2, ErrorKind::invalid_dictionary, "table needs at least two points");
  for (std::size_t k = 0; k < x.size(); ++k) {
    require(std::isfinite(x[k]) && std::isfinite(y[k]), ErrorKind::invalid_dictionary,
            "table entries must be finite");
    if (k > 0) {
      require(x[k] > x[k - 1], ErrorKind::invalid_dictionary,
              "table abscissae must be strictly increasing");
    }
  }
}

double Table::operator()(double t) const {
  if (t <= x.front()) return y.front();
  if (t >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  const auto k = static_cast<std::size_t>(std::distance(x.begin(), it)) - 1;
  const double w = (t - x[k]) / (x[k + 1] - x[k]);
  return y[k] + w * (y[k + 1] - y[k]);
}

double fourier_basis(std::size_t index, double x) {
  if (index == 1) return 1.0;
  const double freq = static_cast<double>(index / 2);
  const double angle = 2.0 * std::numbers::pi * freq * x;
  return index % 2 == 0 ? std::numbers::sqrt2 * std::cos(angle)
                        : std::numbers::sqrt2 * std::sin(angle);
}

Dictionary Dictionary::fourier(std::size_t count, Box domain, bool affine_map) {
  require(count >= 2, ErrorKind::invalid_dictionary, "a dictionary needs M >= 2 functions");
  domain.validate();
  require(domain.dim() == 1, ErrorKind::invalid_dictionary, "the Fourier dictionary is one-dimensional");
  require(domain.is_unit() || affine_map, ErrorKind::invalid_dictionary,
          "the Fourier dictionary is defined on [0,1]; request the affine map for other intervals");
  Dictionary d(DictionaryKind::fourier, count, std::move(domain));
  d.affine_map_ = affine_map && !d.domain_.is_unit();
  return d;
}

Dictionary Dictionary::coordinate(std::size_t dim, std::size_t count, Box domain) {
  require(count >= 2, ErrorKind::invalid_dictionary, "a dictionary needs M >= 2 functions");
  require(count <= dim, ErrorKind::invalid_dictionary, "coordinate dictionaries need M <= d");
  domain.validate();
  require(domain.dim() == dim, ErrorKind::shape, "coordinate dictionary domain has wrong dimension");
  return Dictionary(DictionaryKind::coordinate, count, std::move(domain));
}

Dictionary Dictionary::tabulated(std::vector<Table> tables, Box domain) {
  require(tables.size() >= 2, ErrorKind::invalid_dictionary, "a dictionary needs M >= 2 functions");
  domain.validate();
  require(domain.dim() == 1, ErrorKind::invalid_dictionary, "tabulated dictionaries are one-dimensional");
  for (const auto& t : tables) t.validate();
  Dictionary d(DictionaryKind::tabulated, tables.size(), std::move(domain));
  d.tables_ = std::move(tables);
  return d;
}

double Dictionary::to_unit(double x) const {
  if (!affine_map_) return x;
  return (x - domain_.lower[0]) / (domain_.upper[0] - domain_.lower[0]);
}

double Dictionary::value(std::size_t j, std::span<const double> x) const {
  switch (kind_) {
    case DictionaryKind::fourier:
      return fourier_basis(j + 1, to_unit(x[0]));
    case DictionaryKind::coordinate:
      return x[j];
    case DictionaryKind::tabulated:
      return tables_[j](x[0]);
  }
  return 0.0;
}

DesignMatrix Dictionary::evaluate(const Eigen::MatrixXd& points) const {
  require(static_cast<std::size_t>(points.cols()) == dim(), ErrorKind::shape,
          "points have " + std::to_string(points.cols()) + " coordinates, dictionary expects " +
              std::to_string(dim()));
  DesignMatrix design;
  design.values.resize(points.rows(), static_cast<Eigen::Index>(count_));
  std::vector<double> x(dim());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (std::size_t a = 0; a < dim(); ++a) x[a] = points(i, static_cast<Eigen::Index>(a));
    if (kind_ == DictionaryKind::tabulated) {
      const bool outside = std::any_of(tables_.begin(), tables_.end(),
                                       [&](const Table& t) { return !t.covers(x[0]); });
      if (outside) ++design.clamped_points;
    }
    for (std::size_t j = 0; j < count_; ++j) {
      const double v = value(j, x);
      require(std::isfinite(v), ErrorKind::numeric, "non-finite dictionary value");
      design.values(i, static_cast<Eigen::Index>(j)) = v;
    }
  }
  return design;
}

Eigen::VectorXd Dictionary::combine(const Eigen::VectorXd& coefficients,
                                    const Eigen::MatrixXd& points) const {
  require(static_cast<std::size_t>(coefficients.size()) == count_, ErrorKind::shape,
          "coefficient vector length differs from dictionary size");
  return evaluate(points).values * coefficients;
}

Dictionary build_fourier(std::size_t count) { return Dictionary::fourier(count); }

Dictionary load_tabulated_csv(const std::filesystem::path& path, std::optional<Box> domain) {
  const auto csv = io::read_numeric(path);
  require(csv.header.size() >= 3 && csv.header.front() == "x", ErrorKind::io,
          path.string() + ": tabulated dictionary header must be x,f1,...,fM");
  std::vector<Table> tables(csv.header.size() - 1);
  for (const auto& row : csv.rows) {
    for (std::size_t j = 0; j < tables.size(); ++j) {
      tables[j].x.push_back(row[0]);
      tables[j].y.push_back(row[j + 1]);
    }
  }
  return Dictionary::tabulated(std::move(tables), domain.value_or(Box::unit(1)));
}

Dictionary parse_dictionary(const std::string& shorthand) {
  const auto colon = shorthand.find(':');
  require(colon != std::string::npos, ErrorKind::config,
          "dictionary must be fourier:<M>, coordinate:<d> or tabulated:<path>");
  const std::string kind = shorthand.substr(0, colon);
  const std::string arg = shorthand.substr(colon + 1);
  if (kind == "fourier") {
    const auto m = io::parse_int(arg);
    require(m >= 2, ErrorKind::invalid_dictionary, "a dictionary needs M >= 2 functions");
    return Dictionary::fourier(static_cast<std::size_t>(m));
  }
  if (kind == "coordinate") {
    const auto d = io::parse_int(arg);
    require(d >= 2, ErrorKind::invalid_dictionary, "a dictionary needs M >= 2 functions");
    return Dictionary::coordinate(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
  }
  if (kind == "tabulated") return load_tabulated_csv(arg);
  fail(ErrorKind::config, "unknown dictionary kind '" + kind + "'");
}

Eigen::VectorXd empirical_norms(const DesignMatrix& design) {
  require(design.rows() >= 1, ErrorKind::shape, "design needs at least one row");
  const double n = static_cast<double>(design.rows());
  Eigen::VectorXd norms(design.cols());
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    norms[j] = std::sqrt(design.values.col(j).squaredNorm() / n);
  }
  return norms;
}

DictionaryValidation validate_a2(const Dictionary& dict, const MeasureSpec& measure,
                                 const ValidationThresholds& thresholds) {
  const Population pop(dict, measure);
  DictionaryValidation v;
  v.sup_bound = pop.sup_bound();
  v.sup_grid_points = pop.sup_grid_points();
  v.min_norm = pop.norms().minCoeff();
  v.fourth_moment = pop.fourth_moment();
  require(std::isfinite(v.sup_bound) && std::isfinite(v.min_norm) && std::isfinite(v.fourth_moment),
          ErrorKind::validation, "quadrature produced a non-finite value");
  v.bounded = v.sup_bound <= thresholds.max_sup;
  v.norms_bounded_below = v.min_norm > thresholds.min_norm;
  v.fourth_moment_bounded = v.fourth_moment <= thresholds.max_fourth_moment;
  return v;
}

}  // namespace sparsagg
