#include "sparsagg/solver.hpp"

#include <cmath>

#include "sparsagg/csv.hpp"

namespace sparsagg {

double rate(double A, double n, std::size_t dictionary_size, RateKind kind) {
  require(A > 0.0 && std::isfinite(A), ErrorKind::config, "tuning constant A must be positive");
  require(n >= 1.0, ErrorKind::config, "sample size must be at least 1");
  require(dictionary_size >= 2, ErrorKind::config, "dictionary size must be at least 2");
  switch (kind) {
    case RateKind::log_m:
      return A * std::sqrt(std::log(static_cast<double>(dictionary_size)) / n);
    case RateKind::log_n:
      return A * std::sqrt(std::log(n) / n);
    case RateKind::explicit_value:
      break;
  }
  fail(ErrorKind::config, "explicit rates carry their own value");
}

PenaltyConfig PenaltyConfig::make(double A, RateKind kind, const Eigen::VectorXd& empirical_norms,
                                  std::size_t n, std::optional<double> explicit_rate) {
  PenaltyConfig p;
  p.A = A;
  p.rate_kind = kind;
  if (kind == RateKind::explicit_value) {
    require(explicit_rate.has_value() && *explicit_rate > 0.0 && std::isfinite(*explicit_rate),
            ErrorKind::config, "explicit rate must be a positive number");
    p.rate = *explicit_rate;
  } else {
    p.rate = sparsagg::rate(A, static_cast<double>(n), static_cast<std::size_t>(empirical_norms.size()), kind);
  }
  require(p.rate > 0.0, ErrorKind::config, "rate must be positive");
  p.weights = p.rate * empirical_norms;
  return p;
}

std::pair<RateKind, std::optional<double>> parse_rate(const std::string& text) {
  if (text == "logM" || text == "log_M") return {RateKind::log_m, std::nullopt};
  if (text == "logn" || text == "log_n") return {RateKind::log_n, std::nullopt};
  if (text.rfind("explicit:", 0) == 0) {
    return {RateKind::explicit_value, io::parse_double(text.substr(9))};
  }
  fail(ErrorKind::config, "rate must be logM, logn or explicit:<value>");
}

std::string rate_name(RateKind kind) {
  switch (kind) {
    case RateKind::log_m:
      return "logM";
    case RateKind::log_n:
      return "logn";
    case RateKind::explicit_value:
      return "explicit";
  }
  return "?";
}

double penalized_objective(const DesignMatrix& design, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights, const Eigen::VectorXd& coefficients) {
  const Eigen::VectorXd residual = y - design.values * coefficients;
  const double n = static_cast<double>(design.rows());
  return residual.squaredNorm() / n + 2.0 * weights.dot(coefficients.cwiseAbs());
}

double kkt_residual(const DesignMatrix& design, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                    const Eigen::VectorXd& coefficients) {
  const Eigen::VectorXd residual = y - design.values * coefficients;
  const double n = static_cast<double>(design.rows());
  const Eigen::VectorXd gradient = design.values.transpose() * residual / n;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < gradient.size(); ++j) {
    const double violation = coefficients[j] == 0.0
                                 ? std::max(0.0, std::abs(gradient[j]) - weights[j])
                                 : std::abs(gradient[j] - weights[j] * (coefficients[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, violation);
  }
  return worst;
}

LassoFit fit(const DesignMatrix& design, const Eigen::VectorXd& y, const PenaltyConfig& penalty,
             const FitOptions& options) {
  const Eigen::Index n = design.rows();
  const Eigen::Index m = design.cols();
  require(n >= 1, ErrorKind::shape, "design needs at least one row");
  require(y.size() == n, ErrorKind::shape, "response length differs from design rows");
  require(penalty.weights.size() == m, ErrorKind::shape, "penalty weights differ from design columns");
  require(options.tol > 0.0, ErrorKind::config, "tolerance must be positive");
  require(options.max_sweeps >= 1, ErrorKind::config, "max_sweeps must be at least 1");
  require(y.allFinite() && design.values.allFinite(), ErrorKind::numeric, "inputs must be finite");
  require((penalty.weights.array() >= 0.0).all(), ErrorKind::config, "penalty weights must be nonnegative");

  const double inv_n = 1.0 / static_cast<double>(n);
  const auto& X = design.values;
  Eigen::VectorXd sq_norms(m);
  for (Eigen::Index j = 0; j < m; ++j) sq_norms[j] = X.col(j).squaredNorm() * inv_n;

  LassoFit out;
  out.coefficients = Eigen::VectorXd::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (sq_norms[j] == 0.0) out.frozen.push_back(static_cast<std::size_t>(j));
  }

  auto& lambda = out.coefficients;
  Eigen::VectorXd residual = y;
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (sq_norms[j] == 0.0) continue;
      const double old = lambda[j];
      const double c = X.col(j).dot(residual) * inv_n + sq_norms[j] * old;
      const double updated = soft_threshold(c, penalty.weights[j]) / sq_norms[j];
      const double delta = updated - old;
      if (delta != 0.0) {
        residual.noalias() -= delta * X.col(j);
        lambda[j] = updated;
        max_change = std::max(max_change, std::abs(delta) / (1.0 + std::abs(updated)));
      }
    }
    out.sweeps = sweep;
    if (options.record_objective) {
      out.objective_trace.push_back(residual.squaredNorm() * inv_n +
                                    2.0 * penalty.weights.dot(lambda.cwiseAbs()));
    }
    if (max_change < options.tol) {
      out.converged = true;
      break;
    }
  }

  for (Eigen::Index j = 0; j < m; ++j) {
    if (lambda[j] != 0.0) out.support.push_back(static_cast<std::size_t>(j));
  }
  out.objective = penalized_objective(design, y, penalty.weights, lambda);
  out.kkt_residual = kkt_residual(design, y, penalty.weights, lambda);
  if (!out.converged && out.kkt_residual > 1e3 * options.tol) {
    throw NonConvergenceError("coordinate descent did not converge within " +
                                  std::to_string(options.max_sweeps) + " sweeps",
                              std::move(out));
  }
  return out;
}

Eigen::VectorXd predict(const Dictionary& dict, const Eigen::VectorXd& coefficients,
                        const Eigen::MatrixXd& points) {
  return dict.combine(coefficients, points);
}

}  // namespace sparsagg
