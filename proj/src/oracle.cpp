#include "sparsagg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparsagg/error.hpp"
#include "sparsagg/gram.hpp"

namespace sparsagg {

SparsityResult sparsity(const Eigen::VectorXd& lambda, double eps) {
  require(lambda.allFinite(), ErrorKind::numeric, "coefficient vector must be finite");
  require(eps >= 0.0, ErrorKind::config, "zero tolerance must be nonnegative");
  SparsityResult out;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    if (std::abs(lambda[j]) > eps) out.support.push_back(static_cast<std::size_t>(j));
  }
  out.count = out.support.size();
  return out;
}

Eigen::VectorXd oracle_fourier(const std::vector<double>& theta, std::size_t dictionary_size, std::size_t k) {
  require(k <= dictionary_size, ErrorKind::config,
          "k = " + std::to_string(k) + " exceeds the dictionary size " + std::to_string(dictionary_size));
  const std::size_t available = std::min(theta.size(), dictionary_size);
  std::vector<std::size_t> order(available);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(theta[a]) > std::abs(theta[b]); });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dictionary_size));
  for (std::size_t i = 0; i < std::min(k, available); ++i) {
    out[static_cast<Eigen::Index>(order[i])] = theta[order[i]];
  }
  return out;
}

namespace {

struct Restricted {
  Eigen::VectorXd x;
  double residual2 = 0.0;
  bool singular = false;
};

Restricted solve_restricted(const Target& target, const std::vector<std::size_t>& support) {
  const Eigen::MatrixXd& psi = target.population().gram();
  const Eigen::VectorXd& cross = target.cross();
  const auto k = static_cast<Eigen::Index>(support.size());
  Restricted out;
  if (k == 0) {
    out.residual2 = target.truth_norm2();
    return out;
  }
  Eigen::MatrixXd a(k, k);
  Eigen::VectorXd b(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    b[i] = cross[static_cast<Eigen::Index>(support[static_cast<std::size_t>(i)])];
    for (Eigen::Index j = 0; j < k; ++j) {
      a(i, j) = psi(static_cast<Eigen::Index>(support[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(support[static_cast<std::size_t>(j)]));
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
    ok = d.minCoeff() > 1e-7 * std::max(1.0, d.maxCoeff());
  }
  if (ok) {
    out.x = llt.solve(b);
  } else {
    out.x = a.completeOrthogonalDecomposition().solve(b);
    out.singular = true;
  }
  out.residual2 = std::max(0.0, target.truth_norm2() - b.dot(out.x));
  return out;
}

double binomial(std::size_t m, std::size_t k) {
  k = std::min(k, m - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(m - k + i) / static_cast<double>(i);
  return c;
}

OracleSolution finish(const Target& target, std::vector<std::size_t> support, const Restricted& solved,
                      bool exact) {
  OracleSolution out;
  const auto m = static_cast<Eigen::Index>(target.population().dictionary().size());
  out.coefficients = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < support.size(); ++i) {
    out.coefficients[static_cast<Eigen::Index>(support[i])] = solved.x[static_cast<Eigen::Index>(i)];
  }
  out.support = std::move(support);
  out.exact = exact;
  out.singular = solved.singular;
  out.residual2 = target.dist2(out.coefficients);
  return out;
}

}  // namespace

OracleSolution oracle_general(const Target& target, std::size_t k, double max_supports) {
  const std::size_t m = target.population().dictionary().size();
  require(k <= m, ErrorKind::config, "k = " + std::to_string(k) + " exceeds the dictionary size " + std::to_string(m));
  const double tie = 1e-12 * std::max(1.0, target.truth_norm2());

  if (binomial(m, k) <= max_supports) {
    std::vector<std::size_t> current(k);
    std::iota(current.begin(), current.end(), std::size_t{0});
    std::vector<std::size_t> best_support = current;
    Restricted best = solve_restricted(target, current);
    while (true) {
      // advance to the next combination in lexicographic order
      std::size_t i = k;
      while (i > 0 && current[i - 1] == m - k + i - 1) --i;
      if (i == 0) break;
      ++current[i - 1];
      for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
      Restricted candidate = solve_restricted(target, current);
      if (candidate.residual2 < best.residual2 - tie) {
        best = std::move(candidate);
        best_support = current;
      }
    }
    return finish(target, std::move(best_support), best, true);
  }

  std::vector<std::size_t> chosen;
  Restricted best = solve_restricted(target, chosen);
  for (std::size_t step = 0; step < k; ++step) {
    std::optional<std::size_t> pick;
    Restricted pick_solution;
    for (std::size_t j = 0; j < m; ++j) {
      if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
      std::vector<std::size_t> trial = chosen;
      trial.insert(std::upper_bound(trial.begin(), trial.end(), j), j);
      Restricted candidate = solve_restricted(target, trial);
      if (!pick || candidate.residual2 < pick_solution.residual2 - tie) {
        pick = j;
        pick_solution = std::move(candidate);
      }
    }
    chosen.insert(std::upper_bound(chosen.begin(), chosen.end(), *pick), *pick);
    best = std::move(pick_solution);
  }
  return finish(target, std::move(chosen), best, false);
}

bool fourier_closed_form_applies(const Target& target) {
  const auto& pop = target.population();
  return pop.dictionary().kind() == DictionaryKind::fourier && pop.dictionary().domain().is_unit() &&
         pop.measure().kind == MeasureKind::uniform && target.truth().kind() == TruthKind::fourier_series;
}

OracleSolution oracle_best(const Target& target, std::size_t k) {
  if (!fourier_closed_form_applies(target)) return oracle_general(target, k);
  OracleSolution out;
  out.coefficients = oracle_fourier(target.truth().theta(), target.population().dictionary().size(), k);
  out.support = sparsity(out.coefficients).support;
  out.residual2 = target.dist2(out.coefficients);
  return out;
}

MembershipFlags membership(double dist2, std::size_t m_lambda, double rho_lambda, double r, double C_f,
                           double C_f_prime) {
  require(std::isfinite(dist2) && std::isfinite(rho_lambda) && std::isfinite(C_f) && std::isfinite(C_f_prime),
          ErrorKind::numeric, "membership inputs must be finite");
  require(r > 0.0 && std::isfinite(r), ErrorKind::config, "rate must be positive");
  const double m = static_cast<double>(m_lambda);
  MembershipFlags flags;
  flags.in_lambda = dist2 <= C_f * r * r * m;
  flags.in_lambda_prime = dist2 <= C_f_prime * r;
  const bool coherent = rho_lambda * m <= coherence_threshold;
  flags.in_lambda1 = flags.in_lambda && coherent;
  flags.in_lambda2 = flags.in_lambda_prime && coherent;
  return flags;
}

OracleReport oracle_report(const Target& target, double r, double C_f, double C_f_prime, bool with_sup) {
  require(r > 0.0 && std::isfinite(r), ErrorKind::config, "rate must be positive");
  require(C_f >= 0.0 && C_f_prime >= 0.0, ErrorKind::config, "oracle constants must be nonnegative");
  const std::size_t m = target.population().dictionary().size();
  OracleReport report;
  report.C_f = C_f;
  report.C_f_prime = C_f_prime;

  OracleSolution chosen;
  for (std::size_t k = 0; k <= m; ++k) {
    OracleSolution candidate = oracle_best(target, k);
    const bool inside = candidate.residual2 <= C_f * r * r * static_cast<double>(k);
    if (inside || k == m) {
      chosen = std::move(candidate);
      if (inside) report.k_star = sparsity(chosen.coefficients).count;
      break;
    }
  }
  report.lambda_star = chosen.coefficients;
  report.dist2 = chosen.residual2;
  report.exact = chosen.exact;
  report.singular = chosen.singular;
  const SparsityResult s = sparsity(report.lambda_star);
  report.rho_lambda = coherence(target.population().gram(), s.support).rho_lambda;
  report.memberships = membership(report.dist2, s.count, report.rho_lambda, r, C_f, C_f_prime);
  if (with_sup) report.L_lambda = target.sup_distance(report.lambda_star);
  return report;
}

void BoundConstants::validate() const {
  for (double v : {B1, B2, C, C_prime, c1, c2, c1_prime, c2_prime, b}) {
    require(v > 0.0 && std::isfinite(v), ErrorKind::config, "bound constants must be positive");
  }
}

TheoremKind parse_theorem_kind(const std::string& text) {
  if (text == "T2.1-risk") return TheoremKind::t21_risk;
  if (text == "T2.1-l1") return TheoremKind::t21_l1;
  if (text == "T2.2-risk") return TheoremKind::t22_risk;
  if (text == "T2.2-l1") return TheoremKind::t22_l1;
  if (text == "T2.3") return TheoremKind::t23;
  fail(ErrorKind::config, "unknown bound kind '" + text + "'");
}

std::string theorem_kind_name(TheoremKind kind) {
  switch (kind) {
    case TheoremKind::t21_risk:
      return "T2.1-risk";
    case TheoremKind::t21_l1:
      return "T2.1-l1";
    case TheoremKind::t22_risk:
      return "T2.2-risk";
    case TheoremKind::t22_l1:
      return "T2.2-l1";
    case TheoremKind::t23:
      return "T2.3";
  }
  return "?";
}

double theorem_rhs(TheoremKind kind, const BoundConstants& constants, double r, std::size_t m_lambda,
                   double kappa, double dist2) {
  constants.validate();
  require(r > 0.0 && std::isfinite(r), ErrorKind::config, "rate must be positive");
  const double m = static_cast<double>(m_lambda);
  switch (kind) {
    case TheoremKind::t21_risk:
    case TheoremKind::t21_l1: {
      require(kappa > 0.0, ErrorKind::condition_violated, "kappa must be positive for the restricted-eigenvalue bound");
      require(kappa <= 1.0 + 1e-9, ErrorKind::config, "kappa cannot exceed 1");
      return kind == TheoremKind::t21_risk ? constants.B1 * r * r * m / kappa : constants.B2 * r * m / kappa;
    }
    case TheoremKind::t22_risk:
      return constants.C * r * r * m;
    case TheoremKind::t22_l1:
      return constants.C * r * m;
    case TheoremKind::t23:
      require(dist2 >= 0.0 && std::isfinite(dist2), ErrorKind::numeric, "dist2 must be finite and nonnegative");
      return constants.C_prime * (dist2 + r * r * m);
  }
  return 0.0;
}

}  // namespace sparsagg
