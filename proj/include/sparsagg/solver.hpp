#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sparsagg/dictionary.hpp"
#include "sparsagg/error.hpp"

namespace sparsagg {

enum class RateKind { log_m, log_n, explicit_value };

/// A sqrt(log M / n) or A sqrt(log n / n), natural log.
double rate(double A, double n, std::size_t dictionary_size, RateKind kind);

/// Weighted l1 penalty 2 sum_j omega_j |lambda_j| with omega_j = r ||f_j||_n.
struct PenaltyConfig {
  double A = 1.0;
  RateKind rate_kind = RateKind::log_m;
  double rate = 0.0;
  Eigen::VectorXd weights;

  /// `explicit_rate` is used verbatim when kind is explicit_value; A is
  /// ignored in that case.
  static PenaltyConfig make(double A, RateKind kind, const Eigen::VectorXd& empirical_norms,
                            std::size_t n, std::optional<double> explicit_rate = {});
};

/// Parses `logM`, `logn` or `explicit:<value>`.
std::pair<RateKind, std::optional<double>> parse_rate(const std::string& text);
std::string rate_name(RateKind kind);

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

struct FitOptions {
  double tol = 1e-9;  // on max_j |change_j| / (1 + |lambda_j|) over a sweep
  std::size_t max_sweeps = 100000;
  bool record_objective = false;
};

struct LassoFit {
  Eigen::VectorXd coefficients;
  std::vector<std::size_t> support;  // 0-based
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<std::size_t> frozen;        // columns with ||f_j||_n = 0, held at zero
  std::vector<double> objective_trace;    // after each sweep, when recorded

  std::size_t sparsity() const { return support.size(); }
};

/// Thrown when the sweep budget runs out with kkt_residual > 1e3 tol.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, LassoFit partial)
      : Error(ErrorKind::non_convergence, what), partial_(std::move(partial)) {}

  const LassoFit& partial() const { return partial_; }

 private:
  LassoFit partial_;
};

/// Cyclic coordinate descent from lambda = 0 for
///   n^-1 sum_i (Y_i - f_lambda(X_i))^2 + 2 sum_j omega_j |lambda_j|.
LassoFit fit(const DesignMatrix& design, const Eigen::VectorXd& y, const PenaltyConfig& penalty,
             const FitOptions& options = {});

double penalized_objective(const DesignMatrix& design, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights, const Eigen::VectorXd& coefficients);

/// Largest violation of the subgradient optimality conditions.
double kkt_residual(const DesignMatrix& design, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                    const Eigen::VectorXd& coefficients);

/// f_lambda at each point.
Eigen::VectorXd predict(const Dictionary& dict, const Eigen::VectorXd& coefficients,
                        const Eigen::MatrixXd& points);

}  // namespace sparsagg
