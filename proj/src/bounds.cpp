#include "sparsagg/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "sparsagg/csv.hpp"
#include "sparsagg/error.hpp"

namespace sparsagg {

namespace {

double clamp01(double p) {
  if (std::isnan(p)) return 1.0;
  return std::clamp(p, 0.0, 1.0);
}

double get(const std::optional<double>& value, const char* name, Lemma which, bool allow_zero = false) {
  require(value.has_value(), ErrorKind::config, lemma_name(which) + " needs parameter " + name);
  const double v = *value;
  require(std::isfinite(v) && (allow_zero ? v >= 0.0 : v > 0.0), ErrorKind::config,
          lemma_name(which) + ": parameter " + name + (allow_zero ? " must be nonnegative" : " must be positive"));
  return v;
}

}  // namespace

double bernstein_bound(double n, double epsilon, double w2, double d) {
  require(n >= 0.0 && epsilon >= 0.0 && w2 >= 0.0 && d >= 0.0, ErrorKind::config,
          "Bernstein inputs must be nonnegative");
  if (n == 0.0 || epsilon == 0.0) return 1.0;
  const double denom = 2.0 * (w2 + d * epsilon);
  if (denom == 0.0) return 0.0;
  return clamp01(std::exp(-n * epsilon * epsilon / denom));
}

Lemma parse_lemma(const std::string& text) {
  if (text == "L4") return Lemma::L4;
  if (text == "L5") return Lemma::L5;
  if (text == "L6") return Lemma::L6;
  if (text == "L7") return Lemma::L7;
  if (text == "L9") return Lemma::L9;
  fail(ErrorKind::config, "unknown lemma '" + text + "' (expected L4, L5, L6, L7 or L9)");
}

std::string lemma_name(Lemma which) {
  switch (which) {
    case Lemma::L4:
      return "L4";
    case Lemma::L5:
      return "L5";
    case Lemma::L6:
      return "L6";
    case Lemma::L7:
      return "L7";
    case Lemma::L9:
      return "L9";
  }
  return "?";
}

LemmaParams LemmaParams::from_key_values(const std::vector<std::pair<std::string, std::string>>& entries) {
  LemmaParams p;
  for (const auto& [key, text] : entries) {
    const double v = io::parse_double(text);
    if (key == "n") p.n = v;
    else if (key == "M") p.M = v;
    else if (key == "r") p.r = v;
    else if (key == "c0") p.c0 = v;
    else if (key == "L") p.L = v;
    else if (key == "L0") p.L0 = v;
    else if (key == "b") p.b = v;
    else if (key == "C_f") p.C_f = v;
    else if (key == "kappa") p.kappa = v;
    else if (key == "M_lambda") p.m_lambda = v;
    else if (key == "L_lambda") p.L_lambda = v;
    else fail(ErrorKind::config, "unknown bound parameter '" + key + "'");
  }
  return p;
}

std::vector<std::string> lemma_requirements(Lemma which) {
  switch (which) {
    case Lemma::L4:
      return {"n", "M", "c0", "L"};
    case Lemma::L5:
      return {"n", "M", "r", "b", "c0", "L"};
    case Lemma::L6:
      return {"n", "r", "M_lambda", "L_lambda"};
    case Lemma::L7:
      return {"n", "M", "c0", "L", "L0", "C_f", "kappa", "M_lambda"};
    case Lemma::L9:
      return {"n", "M", "r", "c0", "L", "L0"};
  }
  return {};
}

double lemma7_constant(double c0, double C_f, double kappa) {
  require(c0 > 0.0 && kappa > 0.0 && C_f >= 0.0, ErrorKind::config, "invalid L7 constant inputs");
  const double inner = 2.0 * C_f + 1.0 + 4.0 * std::sqrt(2.0 / kappa);
  return 2.0 * inner * inner / (c0 * c0);
}

double lemma9_constant(double c0) {
  require(c0 > 0.0, ErrorKind::config, "c0 must be positive");
  return 8.0 * 121.0 / (c0 * c0);
}

double lemma_bound(Lemma which, const LemmaParams& p) {
  switch (which) {
    case Lemma::L4: {
      const double n = get(p.n, "n", which), M = get(p.M, "M", which);
      const double c0 = get(p.c0, "c0", which), L = get(p.L, "L", which);
      return clamp01(2.0 * M * std::exp(-n * c0 * c0 / (12.0 * L * L)));
    }
    case Lemma::L5: {
      const double n = get(p.n, "n", which), M = get(p.M, "M", which), r = get(p.r, "r", which);
      const double b = get(p.b, "b", which), c0 = get(p.c0, "c0", which), L = get(p.L, "L", which);
      const double t1 = 2.0 * M * std::exp(-n * r * r / (16.0 * b));
      const double t2 = 2.0 * M * std::exp(-n * r * c0 / (8.0 * std::sqrt(2.0) * L));
      const double t3 = 2.0 * M * std::exp(-n * c0 * c0 / (12.0 * L * L));
      return clamp01(t1 + t2 + t3);
    }
    case Lemma::L6: {
      const double n = get(p.n, "n", which), r = get(p.r, "r", which);
      const double m = get(p.m_lambda, "M_lambda", which, true);
      const double L = get(p.L_lambda, "L_lambda", which, true);
      if (L == 0.0) return 0.0;
      return clamp01(std::exp(-m * n * r * r / (4.0 * L * L)));
    }
    case Lemma::L7: {
      const double n = get(p.n, "n", which), M = get(p.M, "M", which);
      const double c0 = get(p.c0, "c0", which), L = get(p.L, "L", which), L0 = get(p.L0, "L0", which);
      const double C_f = get(p.C_f, "C_f", which, true), kappa = get(p.kappa, "kappa", which);
      const double m = get(p.m_lambda, "M_lambda", which, true);
      if (m == 0.0) return 0.0;
      const double C = lemma7_constant(c0, C_f, kappa);
      const double t1 = 2.0 * M * M * std::exp(-n / (16.0 * L0 * C * C * m * m));
      const double t2 = 2.0 * M * M * std::exp(-n / (8.0 * L * L * C * m));
      return clamp01(t1 + t2);
    }
    case Lemma::L9: {
      const double n = get(p.n, "n", which), M = get(p.M, "M", which), r = get(p.r, "r", which);
      const double c0 = get(p.c0, "c0", which), L = get(p.L, "L", which), L0 = get(p.L0, "L0", which);
      const double C = lemma9_constant(c0);
      const double t1 = 2.0 * M * M * std::exp(-n * r * r / (16.0 * C * C * L0));
      const double t2 = 2.0 * M * M * std::exp(-n * r / (8.0 * L * L * C));
      return clamp01(t1 + t2);
    }
  }
  return 1.0;
}

EventFlags event_diagnostics(const DesignMatrix& design, const std::optional<Eigen::VectorXd>& noise,
                             const std::optional<Eigen::VectorXd>& truth_values, const Eigen::VectorXd& weights,
                             const Eigen::VectorXd& population_sq_norms, const Eigen::VectorXd& lambda,
                             double oracle_dist2, double r) {
  require(noise.has_value() && truth_values.has_value(), ErrorKind::unsupported,
          "event diagnostics need the simulated noise and truth values");
  const Eigen::Index n = design.rows();
  const Eigen::Index m = design.cols();
  require(n >= 1, ErrorKind::shape, "design needs at least one row");
  require(noise->size() == n && truth_values->size() == n, ErrorKind::shape,
          "noise and truth vectors must have one entry per row");
  require(weights.size() == m && population_sq_norms.size() == m && lambda.size() == m, ErrorKind::shape,
          "per-function vectors must match the design columns");
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto& X = design.values;

  EventFlags flags;
  const Eigen::VectorXd v = X.transpose() * *noise * inv_n;
  flags.e1 = true;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (2.0 * std::abs(v[j]) > weights[j]) flags.e1 = false;
  }
  flags.e2 = true;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double emp = X.col(j).squaredNorm() * inv_n;
    const double pop = population_sq_norms[j];
    if (!(0.5 * pop <= emp && emp <= 2.0 * pop)) flags.e2 = false;
  }
  const double emp_dist2 = (X * lambda - *truth_values).squaredNorm() * inv_n;
  std::size_t m_lambda = 0;
  for (Eigen::Index j = 0; j < m; ++j) m_lambda += lambda[j] != 0.0 ? 1 : 0;
  flags.e3 = emp_dist2 <= 2.0 * oracle_dist2 + r * r * static_cast<double>(m_lambda);
  return flags;
}

EventFrequencies aggregate_events(std::span<const EventFlags> flags) {
  EventFrequencies out;
  out.replicates = flags.size();
  if (flags.empty()) return out;
  for (const auto& f : flags) {
    out.e1 += f.e1 ? 1.0 : 0.0;
    out.e2 += f.e2 ? 1.0 : 0.0;
    out.e3 += f.e3 ? 1.0 : 0.0;
    out.e1_and_e2 += (f.e1 && f.e2) ? 1.0 : 0.0;
  }
  const double count = static_cast<double>(flags.size());
  out.e1 /= count;
  out.e2 /= count;
  out.e3 /= count;
  out.e1_and_e2 /= count;
  return out;
}

}  // namespace sparsagg
