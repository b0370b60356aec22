#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sparsagg/dictionary.hpp"
#include "sparsagg/measure.hpp"
#include "sparsagg/population.hpp"

namespace sparsagg {

/// Population Gram Psi_M and empirical Gram Psi_{n,M}.
struct GramPair {
  Eigen::MatrixXd population;
  Eigen::MatrixXd empirical;
};

struct CoherenceReport {
  Eigen::MatrixXd rho;      // correlation matrix
  double rho_lambda = 0.0;  // max_{i in support} max_{j != i} |rho(i, j)|
};

/// Psi_{n,M} = n^-1 Phi^T Phi, symmetrized.
Eigen::MatrixXd empirical_gram(const DesignMatrix& design);

GramPair gram_pair(const Population& population, const DesignMatrix& design);
GramPair gram_pair(const Dictionary& dict, const MeasureSpec& measure, const DesignMatrix& design);

/// Largest kappa with Psi - kappa diag(Psi) PSD: the smallest eigenvalue of
/// D^{-1/2} Psi D^{-1/2}, clamped below at zero.
double kappa(const Eigen::MatrixXd& psi);

/// Support indices are 0-based.
CoherenceReport coherence(const Eigen::MatrixXd& psi, const std::vector<std::size_t>& support);

/// max_{i,j} |psi_M(i,j) - psi_{n,M}(i,j)|.
double eta(const GramPair& pair);

/// Smallest eigenvalue of a symmetric matrix; values in [-1e-10, 0) read as 0.
double min_eigenvalue(const Eigen::MatrixXd& symmetric);

/// Renders `key=value` lines.
std::string format_report(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace sparsagg
