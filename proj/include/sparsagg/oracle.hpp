#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sparsagg/truth.hpp"

namespace sparsagg {

struct SparsityResult {
  std::vector<std::size_t> support;  // 0-based J(lambda)
  std::size_t count = 0;             // M(lambda)
};

/// Entries with |lambda_j| <= eps count as zero.
SparsityResult sparsity(const Eigen::VectorXd& lambda, double eps = 0.0);

/// Keeps theta_j for the k largest |theta_j| with j <= M, ties to the smaller index.
Eigen::VectorXd oracle_fourier(const std::vector<double>& theta, std::size_t dictionary_size, std::size_t k);

struct OracleSolution {
  Eigen::VectorXd coefficients;
  std::vector<std::size_t> support;  // 0-based, ascending
  double residual2 = 0.0;            // ||f_lambda - f||^2
  bool exact = true;                 // false when greedy selection was used
  bool singular = false;             // a restricted Gram needed a pseudo-solve
};

/// Best k-term approximation in L2(mu). Exhaustive over supports when
/// C(M, k) <= max_supports, greedy forward selection otherwise.
OracleSolution oracle_general(const Target& target, std::size_t k, double max_supports = 1e5);

/// Closed form for Fourier truths on the Fourier dictionary under the uniform
/// measure on [0, 1]; oracle_general for everything else.
OracleSolution oracle_best(const Target& target, std::size_t k);

bool fourier_closed_form_applies(const Target& target);

struct MembershipFlags {
  bool in_lambda = false;        // dist2 <= C_f r^2 M(lambda)
  bool in_lambda_prime = false;  // dist2 <= C_f' r
  bool in_lambda1 = false;       // in_lambda and rho M(lambda) <= 1/45
  bool in_lambda2 = false;       // in_lambda_prime and rho M(lambda) <= 1/45
};

inline constexpr double coherence_threshold = 1.0 / 45.0;

MembershipFlags membership(double dist2, std::size_t m_lambda, double rho_lambda, double r, double C_f,
                           double C_f_prime);

struct OracleReport {
  Eigen::VectorXd lambda_star;
  std::optional<std::size_t> k_star;  // empty when no k <= M enters the oracle set
  double dist2 = 0.0;
  double L_lambda = 0.0;
  double C_f = 1.0;
  double C_f_prime = 1.0;
  double rho_lambda = 0.0;
  MembershipFlags memberships;
  bool exact = true;
  bool singular = false;
};

/// Scans k = 0, 1, ... for the smallest k whose best k-term approximation lies
/// in the oracle set. When none does, lambda_star is the k = M solution.
/// `with_sup` controls whether L(lambda*) is evaluated.
OracleReport oracle_report(const Target& target, double r, double C_f, double C_f_prime, bool with_sup = true);

struct BoundConstants {
  double B1 = 1.0;
  double B2 = 1.0;
  double C = 1.0;
  double C_prime = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double c1_prime = 1.0;
  double c2_prime = 1.0;
  double b = 1.0;

  void validate() const;
};

enum class TheoremKind { t21_risk, t21_l1, t22_risk, t22_l1, t23 };

TheoremKind parse_theorem_kind(const std::string& text);
std::string theorem_kind_name(TheoremKind kind);

double theorem_rhs(TheoremKind kind, const BoundConstants& constants, double r, std::size_t m_lambda,
                   double kappa, double dist2);

}  // namespace sparsagg
