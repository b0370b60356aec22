#include "sparsagg/truth.hpp"

#include <algorithm>
#include <cmath>

#include "sparsagg/csv.hpp"
#include "sparsagg/error.hpp"

namespace sparsagg {

TruthSpec TruthSpec::fourier(std::vector<double> theta) {
  for (double v : theta) require(std::isfinite(v), ErrorKind::config, "Fourier coefficients must be finite");
  TruthSpec t;
  t.kind_ = TruthKind::fourier_series;
  t.theta_ = std::move(theta);
  return t;
}

TruthSpec TruthSpec::fourier_sparse(const std::vector<std::pair<std::size_t, double>>& entries) {
  std::size_t length = 0;
  for (const auto& [j, v] : entries) {
    require(j >= 1, ErrorKind::config, "Fourier indices are 1-based");
    length = std::max(length, j);
  }
  std::vector<double> theta(length, 0.0);
  for (const auto& [j, v] : entries) theta[j - 1] = v;
  return fourier(std::move(theta));
}

TruthSpec TruthSpec::sobolev(double beta, double scale, std::size_t terms) {
  require(beta > 0.5, ErrorKind::config, "Sobolev smoothness must exceed 1/2");
  require(terms >= 1, ErrorKind::config, "Sobolev truth needs at least one term");
  std::vector<double> theta(terms);
  const double decay = beta + 0.6;
  for (std::size_t j = 1; j <= terms; ++j) {
    const double sign = (j % 2 == 1) ? 1.0 : -1.0;
    theta[j - 1] = scale * sign * std::pow(static_cast<double>(j), -decay);
  }
  TruthSpec t = fourier(std::move(theta));
  double q = 0.0;
  for (std::size_t j = 1; j <= terms; ++j) {
    q += std::pow(static_cast<double>(j), 2.0 * beta) * t.theta_[j - 1] * t.theta_[j - 1];
  }
  t.sobolev_class = std::make_pair(beta, q);
  return t;
}

TruthSpec TruthSpec::linear(Eigen::VectorXd coefficients, Box domain) {
  domain.validate();
  require(static_cast<std::size_t>(coefficients.size()) == domain.dim(), ErrorKind::shape,
          "linear truth coefficients must match the domain dimension");
  require(coefficients.allFinite(), ErrorKind::config, "linear coefficients must be finite");
  TruthSpec t;
  t.kind_ = TruthKind::linear;
  t.coefficients_ = std::move(coefficients);
  t.domain_ = std::move(domain);
  return t;
}

TruthSpec TruthSpec::tabulated(Table table, Box domain) {
  table.validate();
  domain.validate();
  require(domain.dim() == 1, ErrorKind::config, "tabulated truths are one-dimensional");
  TruthSpec t;
  t.kind_ = TruthKind::tabulated;
  t.table_ = std::move(table);
  t.domain_ = std::move(domain);
  return t;
}

TruthSpec TruthSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, ErrorKind::config,
          "truth must be fourier:<j>:<v>,..., sobolev:<beta>[:<scale>[:<terms>]], linear:<v>,... or "
          "tabulated:<path>");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  if (kind == "fourier") {
    std::vector<std::pair<std::size_t, double>> entries;
    if (!io::trim(arg).empty()) {
      for (const auto& item : io::split(arg, ',')) {
        const auto parts = io::split(item, ':');
        require(parts.size() == 2, ErrorKind::config, "Fourier truth entries are <index>:<value>");
        entries.emplace_back(static_cast<std::size_t>(io::parse_int(parts[0])), io::parse_double(parts[1]));
      }
    }
    return fourier_sparse(entries);
  }
  if (kind == "sobolev") {
    const auto parts = io::split(arg, ':');
    const double beta = io::parse_double(parts.at(0));
    const double scale = parts.size() > 1 ? io::parse_double(parts[1]) : 1.0;
    const auto terms = parts.size() > 2 ? static_cast<std::size_t>(io::parse_int(parts[2])) : std::size_t{101};
    return sobolev(beta, scale, terms);
  }
  if (kind == "linear") {
    const auto parts = io::split(arg, ',');
    Eigen::VectorXd c(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) c[static_cast<Eigen::Index>(i)] = io::parse_double(parts[i]);
    return linear(std::move(c), Box::unit(parts.size()));
  }
  if (kind == "tabulated") {
    const auto csv = io::read_numeric(arg);
    require(csv.header.size() == 2, ErrorKind::io, arg + ": tabulated truth header must be x,f");
    Table table;
    for (const auto& row : csv.rows) {
      table.x.push_back(row[0]);
      table.y.push_back(row[1]);
    }
    return tabulated(std::move(table));
  }
  fail(ErrorKind::config, "unknown truth kind '" + kind + "'");
}

double TruthSpec::value(std::span<const double> x) const {
  switch (kind_) {
    case TruthKind::fourier_series: {
      double sum = 0.0;
      for (std::size_t j = 0; j < theta_.size(); ++j) {
        if (theta_[j] != 0.0) sum += theta_[j] * fourier_basis(j + 1, x[0]);
      }
      return sum;
    }
    case TruthKind::linear: {
      double sum = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) sum += coefficients_[static_cast<Eigen::Index>(a)] * x[a];
      return sum;
    }
    case TruthKind::tabulated:
      return table_(x[0]);
  }
  return 0.0;
}

Eigen::VectorXd TruthSpec::values(const Eigen::MatrixXd& points) const {
  const std::size_t want = kind_ == TruthKind::linear ? static_cast<std::size_t>(coefficients_.size()) : 1;
  require(static_cast<std::size_t>(points.cols()) == want, ErrorKind::shape,
          "points do not match the truth's input dimension");
  Eigen::VectorXd out(points.rows());
  std::vector<double> x(want);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (std::size_t a = 0; a < want; ++a) x[a] = points(i, static_cast<Eigen::Index>(a));
    out[i] = value(x);
  }
  return out;
}

std::size_t TruthSpec::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(theta_.begin(), theta_.end(), [](double v) { return v != 0.0; }));
}

void TruthSpec::validate_tags() const {
  if (l0_k) {
    require(kind_ == TruthKind::fourier_series, ErrorKind::config, "L0(k) tags need Fourier coefficients");
    require(nonzero_count() <= *l0_k, ErrorKind::config,
            "truth has " + std::to_string(nonzero_count()) + " nonzero coefficients, more than k = " +
                std::to_string(*l0_k));
  }
  if (l1_budget) {
    double total = 0.0;
    for (double v : theta_) total += std::abs(v);
    require(total <= *l1_budget, ErrorKind::config, "sum of |theta_j| exceeds the l1 budget");
  }
  if (sobolev_class) {
    const auto [beta, q] = *sobolev_class;
    double total = 0.0;
    for (std::size_t j = 1; j <= theta_.size(); ++j) {
      total += std::pow(static_cast<double>(j), 2.0 * beta) * theta_[j - 1] * theta_[j - 1];
    }
    require(total <= q * (1.0 + 1e-12), ErrorKind::config, "Sobolev ellipsoid constraint violated");
  }
}

Target::Target(const Population& population, TruthSpec truth)
    : population_(&population), truth_(std::move(truth)) {
  const auto& dict = population.dictionary();
  if (dict.kind() == DictionaryKind::coordinate) {
    require(truth_.kind() == TruthKind::linear, ErrorKind::unsupported,
            "coordinate dictionaries need a linear truth");
    require(truth_.domain() == dict.domain(), ErrorKind::config, "truth and dictionary domains differ");
    const Eigen::MatrixXd& s = population.second_moments();
    padded_ = truth_.coefficients();
    const auto m = static_cast<Eigen::Index>(dict.size());
    cross_ = (s * padded_).head(m);
    truth_norm2_ = padded_.dot(s * padded_);
  } else {
    require(truth_.kind() != TruthKind::linear, ErrorKind::unsupported,
            "one-dimensional dictionaries need a one-dimensional truth");
    const Quadrature& q = *population.quadrature();
    truth_on_nodes_ = truth_.values(q.nodes);
    cross_ = population.basis_on_nodes().transpose() * q.weights.cwiseProduct(truth_on_nodes_);
    truth_norm2_ = q.weights.dot(truth_on_nodes_.cwiseAbs2());
  }
  require(cross_.allFinite() && std::isfinite(truth_norm2_), ErrorKind::numeric,
          "truth integrals are not finite");
}

double Target::dist2(const Eigen::VectorXd& coefficients) const {
  const auto& dict = population_->dictionary();
  require(static_cast<std::size_t>(coefficients.size()) == dict.size(), ErrorKind::shape,
          "coefficient vector length differs from dictionary size");
  if (dict.kind() == DictionaryKind::coordinate) {
    Eigen::VectorXd delta = -padded_;
    delta.head(coefficients.size()) += coefficients;
    return std::max(0.0, delta.dot(population_->second_moments() * delta));
  }
  const Quadrature& q = *population_->quadrature();
  const Eigen::VectorXd diff = population_->basis_on_nodes() * coefficients - truth_on_nodes_;
  return q.weights.dot(diff.cwiseAbs2());
}

double Target::sup_distance(const Eigen::VectorXd& coefficients) const {
  const auto& dict = population_->dictionary();
  require(static_cast<std::size_t>(coefficients.size()) == dict.size(), ErrorKind::shape,
          "coefficient vector length differs from dictionary size");
  if (dict.kind() == DictionaryKind::coordinate) {
    Eigen::VectorXd delta = -padded_;
    delta.head(coefficients.size()) += coefficients;
    const Box& box = dict.domain();
    double hi = 0.0, lo = 0.0;
    for (std::size_t a = 0; a < box.dim(); ++a) {
      const double d = delta[static_cast<Eigen::Index>(a)];
      hi += std::max(d * box.lower[a], d * box.upper[a]);
      lo += std::min(d * box.lower[a], d * box.upper[a]);
    }
    return std::max(std::abs(hi), std::abs(lo));
  }
  const Eigen::VectorXd grid = population_->sup_points();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double x = grid[k];
    const std::span<const double> pt(&x, 1);
    double f_lambda = 0.0;
    for (std::size_t j = 0; j < dict.size(); ++j) {
      const double c = coefficients[static_cast<Eigen::Index>(j)];
      if (c != 0.0) f_lambda += c * dict.value(j, pt);
    }
    worst = std::max(worst, std::abs(truth_.value(pt) - f_lambda));
  }
  return worst;
}

double Target::truth_sup() const {
  return sup_distance(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(population_->dictionary().size())));
}

}  // namespace sparsagg
