#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsagg/dictionary.hpp"

namespace sparsagg {

/// exp(-n eps^2 / (2 (w2 + d eps))), clamped to [0, 1].
double bernstein_bound(double n, double epsilon, double w2, double d);

enum class Lemma { L4, L5, L6, L7, L9 };

Lemma parse_lemma(const std::string& text);
std::string lemma_name(Lemma which);
inline constexpr Lemma all_lemmas[] = {Lemma::L4, Lemma::L5, Lemma::L6, Lemma::L7, Lemma::L9};

/// Inputs of the tail bounds. Each lemma reads only the fields it needs.
struct LemmaParams {
  std::optional<double> n;
  std::optional<double> M;
  std::optional<double> r;
  std::optional<double> c0;
  std::optional<double> L;
  std::optional<double> L0;
  std::optional<double> b;
  std::optional<double> C_f;
  std::optional<double> kappa;
  std::optional<double> m_lambda;
  std::optional<double> L_lambda;

  /// Reads keys n, M, r, c0, L, L0, b, C_f, kappa, M_lambda, L_lambda.
  static LemmaParams from_key_values(const std::vector<std::pair<std::string, std::string>>& entries);
};

/// Names of the parameters the lemma reads.
std::vector<std::string> lemma_requirements(Lemma which);

/// The lemma's explicit probability bound, clamped to [0, 1]. A missing or
/// nonpositive required parameter raises a config error.
double lemma_bound(Lemma which, const LemmaParams& params);

double lemma7_constant(double c0, double C_f, double kappa);
double lemma9_constant(double c0);

struct EventFlags {
  bool e1 = false;  // 2 |V_j| <= omega_j for all j
  bool e2 = false;  // ||f_j||^2 / 2 <= ||f_j||_n^2 <= 2 ||f_j||^2 for all j
  bool e3 = false;  // ||f_lambda - f||_n^2 <= 2 ||f_lambda - f||^2 + r^2 M(lambda)
};

/// Good-event indicators for one simulated sample. `noise` and
/// `truth_values` hold W_i and f(X_i); either one missing raises an
/// unsupported error. `population_sq_norms` holds ||f_j||^2 and
/// `oracle_dist2` holds ||f_lambda - f||^2 for the reference vector `lambda`.
EventFlags event_diagnostics(const DesignMatrix& design, const std::optional<Eigen::VectorXd>& noise,
                             const std::optional<Eigen::VectorXd>& truth_values, const Eigen::VectorXd& weights,
                             const Eigen::VectorXd& population_sq_norms, const Eigen::VectorXd& lambda,
                             double oracle_dist2, double r);

struct EventFrequencies {
  std::size_t replicates = 0;
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double e1_and_e2 = 0.0;
};

EventFrequencies aggregate_events(std::span<const EventFlags> flags);

}  // namespace sparsagg
