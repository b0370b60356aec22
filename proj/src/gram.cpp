#include "sparsagg/gram.hpp"

#include <cmath>

#include "sparsagg/error.hpp"

namespace sparsagg {

Eigen::MatrixXd empirical_gram(const DesignMatrix& design) {
  require(design.rows() >= 1, ErrorKind::shape, "design needs at least one row");
  const double n = static_cast<double>(design.rows());
  Eigen::MatrixXd g = design.values.transpose() * design.values / n;
  g = 0.5 * (g + g.transpose()).eval();
  require(g.allFinite(), ErrorKind::numeric, "empirical Gram has non-finite entries");
  return g;
}

GramPair gram_pair(const Population& population, const DesignMatrix& design) {
  require(static_cast<std::size_t>(design.cols()) == population.dictionary().size(), ErrorKind::shape,
          "design columns do not match the dictionary");
  return GramPair{population.gram(), empirical_gram(design)};
}

GramPair gram_pair(const Dictionary& dict, const MeasureSpec& measure, const DesignMatrix& design) {
  return gram_pair(Population(dict, measure), design);
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  require(symmetric.rows() == symmetric.cols() && symmetric.rows() > 0, ErrorKind::shape,
          "expected a non-empty square matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, ErrorKind::numeric, "eigenvalue solver failed");
  const double smallest = solver.eigenvalues().minCoeff();
  return (smallest < 0.0 && smallest >= -1e-10) ? 0.0 : smallest;
}

double kappa(const Eigen::MatrixXd& psi) {
  require(psi.rows() == psi.cols() && psi.rows() > 0, ErrorKind::shape, "expected a non-empty square matrix");
  const Eigen::VectorXd diag = psi.diagonal();
  require((diag.array() > 0.0).all(), ErrorKind::degenerate_dictionary,
          "kappa needs strictly positive Gram diagonal entries");
  const Eigen::VectorXd scale = diag.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd corr = scale.asDiagonal() * psi * scale.asDiagonal();
  corr = 0.5 * (corr + corr.transpose()).eval();
  return std::max(0.0, min_eigenvalue(corr));
}

CoherenceReport coherence(const Eigen::MatrixXd& psi, const std::vector<std::size_t>& support) {
  require(psi.rows() == psi.cols() && psi.rows() > 0, ErrorKind::shape, "expected a non-empty square matrix");
  const Eigen::VectorXd diag = psi.diagonal();
  require((diag.array() > 0.0).all(), ErrorKind::degenerate_dictionary,
          "coherence needs strictly positive Gram diagonal entries");
  const Eigen::Index m = psi.rows();

  CoherenceReport report;
  report.rho.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      report.rho(i, j) = i == j ? 1.0 : psi(i, j) / std::sqrt(diag[i] * diag[j]);
    }
  }
  for (std::size_t i : support) {
    require(i < static_cast<std::size_t>(m), ErrorKind::shape, "support index out of range");
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != row) report.rho_lambda = std::max(report.rho_lambda, std::abs(report.rho(row, j)));
    }
  }
  return report;
}

double eta(const GramPair& pair) {
  require(pair.population.rows() == pair.empirical.rows() && pair.population.cols() == pair.empirical.cols(),
          ErrorKind::shape, "Gram matrices differ in shape");
  if (pair.population.size() == 0) return 0.0;
  return (pair.population - pair.empirical).cwiseAbs().maxCoeff();
}

std::string format_report(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

}  // namespace sparsagg
