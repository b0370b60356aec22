// Acceptance harness. Prints one PASS/FAIL line per criterion and exits
// nonzero when any hard criterion fails. Criterion 11 is a soft check and
// reports SOFT-FAIL without affecting the exit status.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sparsagg/experiment.hpp"
#include "sparsagg/gram.hpp"
#include "sparsagg/stats.hpp"

using namespace sparsagg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// A fit kept for the independent KKT recheck.
struct RecordedFit {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd weights;
  Eigen::VectorXd lambda;
  bool converged;
};

std::vector<RecordedFit> recorded;

void record(const DesignMatrix& d, const Eigen::VectorXd& y, const Eigen::VectorXd& w, const LassoFit& f) {
  recorded.push_back({d.values, y, w, f.coefficients, f.converged});
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Eigen::VectorXd gaussian(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

const char* criterion4_config =
    "preset=fourier-L0k\n"
    "n=512,1024,2048,4096,8192\n"
    "M=25\n"
    "k=3\n"
    "theta=2:3,4:-2,7:1\n"
    "noise=uniform:1\n"
    "A=4\n"
    "replicates=100\n"
    "seed=2024\n";

const char* criterion11_config =
    "preset=fourier-sobolev\n"
    "n=512,1024,2048,4096,8192\n"
    "M=25\n"
    "beta=1\n"
    "scale=1\n"
    "noise=uniform:1\n"
    "A=4\n"
    "replicates=100\n"
    "seed=2024\n";

struct Rates {
  std::optional<SlopeResult> risk;
  std::optional<SlopeResult> l1;
  std::size_t nonconverged = 0;
};

Rates slopes_of(const ExperimentConfig& config, const std::vector<ExperimentRow>& rows) {
  const std::vector<CellSummary> cells = summarize(rows, plan_cells(config), config.tol);
  Rates out;
  for (const auto& c : cells) out.nonconverged += c.nonconverged;
  for (const SlopeResult& s : rate_slopes(cells)) {
    if (s.metric == SlopeMetric::risk) out.risk = s;
    if (s.metric == SlopeMetric::l1_err) out.l1 = s;
  }
  return out;
}

Outcome slope_in(const std::optional<SlopeResult>& s, double lo, double hi) {
  if (!s) return {false, "no slope (fewer than four valid in-regime cells)"};
  const bool ok = s->points == 5 && s->slope >= lo && s->slope <= hi;
  return {ok, "slope " + fmt(s->slope) + " over " + std::to_string(s->points) + " cells, target [" + fmt(lo) + ", " +
                  fmt(hi) + "]"};
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (unsigned seed = 0; seed < 50; ++seed) {
    const Eigen::MatrixXd x = oracles::orthonormal_design(64, 8, seed);
    Rng rng(10000 + seed);
    Eigen::VectorXd y = gaussian(64, rng);
    y += x.col(seed % 8) * (1.0 + seed % 3);
    const PenaltyConfig pen = PenaltyConfig::make(1.0, RateKind::log_m, Eigen::VectorXd::Ones(8), 64);
    const DesignMatrix d{x};
    const LassoFit f = fit(d, y, pen);
    record(d, y, pen.weights, f);
    for (int j = 0; j < 8; ++j) {
      const double closed = soft_threshold(x.col(j).dot(y) / 64.0, pen.weights[j]);
      worst = std::max(worst, std::abs(f.coefficients[j] - closed));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-8 && secs < 1.0, "max deviation " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome criterion2() {
  double worst_coef = 0.0, worst_obj = 0.0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    Rng rng(20000 + seed);
    Eigen::MatrixXd x(4, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) x(i, j) = rng.normal();
    const Eigen::Vector2d truth(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Eigen::VectorXd y = x * truth + 0.3 * gaussian(4, rng);
    const Eigen::VectorXd w = Eigen::Vector2d(rng.uniform(0.01, 0.3), rng.uniform(0.01, 0.3));
    PenaltyConfig pen;
    pen.rate_kind = RateKind::explicit_value;
    pen.rate = 1.0;
    pen.weights = w;
    const DesignMatrix d{x};
    const LassoFit f = fit(d, y, pen);
    record(d, y, w, f);
    const oracles::GridResult g = oracles::grid_search(x, y, w);
    worst_coef = std::max(worst_coef, (f.coefficients - Eigen::VectorXd(g.lambda)).cwiseAbs().maxCoeff());
    worst_obj = std::max(worst_obj, std::abs(f.objective - g.objective));
  }
  return {worst_coef <= 2e-3 && worst_obj <= 1e-5,
          "max coefficient gap " + fmt(worst_coef) + ", max objective gap " + fmt(worst_obj)};
}

Outcome criterion6() {
  const ExperimentConfig config = ExperimentConfig::parse(
      "preset=linear\nn=200\nM=10\nk=3\nA=0.000001\nreplicates=20\nseed=606\nnoise=none\ntol=1e-13\n");
  config.validate();
  const std::size_t m = *config.M;
  const Population pop(config.dictionary(m), config.measure(m));
  const Target target(pop, config.truth(m));
  const OracleSolution star = oracle_best(target, 3);
  const std::vector<std::size_t>& true_support = star.support;
  double min_true = std::numeric_limits<double>::infinity();
  for (std::size_t j : true_support) min_true = std::min(min_true, std::abs(star.coefficients[j]));
  double worst_risk = 0.0, worst_weight = 0.0;
  bool supports = true, converged = true;
  for (std::size_t rep = 0; rep < config.replicates; ++rep) {
    const Sample s = generate(config.truth(m), pop.measure(), config.noise, 200, config.replicate_seed(0, rep));
    const DesignMatrix d = pop.dictionary().evaluate(s.x);
    const PenaltyConfig pen = PenaltyConfig::make(config.A[0], RateKind::log_m, empirical_norms(d), 200);
    FitOptions opt;
    opt.tol = config.tol;
    const LassoFit f = fit(d, s.y, pen, opt);
    record(d, s.y, pen.weights, f);
    converged = converged && f.converged;
    worst_risk = std::max(worst_risk, target.dist2(f.coefficients));
    worst_weight = std::max(worst_weight, pen.weights.maxCoeff());
    for (std::size_t j : true_support) supports = supports && f.coefficients[j] != 0.0;
  }
  const bool ok = true_support.size() == 3 && worst_weight < min_true && converged && worst_risk <= 1e-10 && supports;
  return {ok, "max risk " + fmt(worst_risk) + ", support recovered " + (supports ? "on all 20 seeds" : "NOT always") +
                  ", max omega " + fmt(worst_weight)};
}

// Refits every criterion-4 replicate from its seed so the solver output can be
// certified independently of the stored kkt column.
void record_criterion4_refits(const ExperimentConfig& config, const std::vector<ExperimentRow>& rows) {
  const std::size_t m = *config.M;
  const Population pop(config.dictionary(m), config.measure(m));
  const TruthSpec truth = config.truth(m);
  for (const ExperimentRow& row : rows) {
    const Sample s = generate(truth, pop.measure(), config.noise, row.n, row.seed);
    const DesignMatrix d = pop.dictionary().evaluate(s.x);
    const PenaltyConfig pen = PenaltyConfig::make(row.A, config.effective_rate(), empirical_norms(d), row.n);
    FitOptions opt;
    opt.tol = config.tol;
    opt.max_sweeps = config.max_sweeps;
    record(d, s.y, pen.weights, fit(d, s.y, pen, opt));
  }
}

Outcome criterion3() {
  std::size_t checked = 0;
  double worst = 0.0;
  for (const RecordedFit& f : recorded) {
    if (!f.converged) continue;
    worst = std::max(worst, oracles::kkt_violation(f.x, f.y, f.weights, f.lambda));
    ++checked;
  }
  return {checked > 0 && worst <= 1e-6,
          std::to_string(checked) + " converged fits, max recomputed violation " + fmt(worst)};
}

Outcome criterion7() {
  ExperimentConfig config = ExperimentConfig::parse(criterion4_config);
  config.n = {4096};
  config.replicates = 500;
  const std::vector<ExperimentRow> rows = run(config);
  const CellPlan cell = plan_cells(config).front();
  std::size_t e2_fail = 0, e3_fail = 0;
  for (const auto& r : rows) {
    e2_fail += r.e2 ? 0 : 1;
    e3_fail += r.e3 ? 0 : 1;
  }
  const std::size_t limit4 = binomial_upper_quantile(rows.size(), cell.lemma4);
  const std::size_t limit6 = binomial_upper_quantile(rows.size(), cell.lemma6);
  const bool ok = rows.size() == 500 && cell.lemma4 < 1.0 && cell.lemma6 < 1.0 && e2_fail <= limit4 &&
                  e3_fail <= limit6;
  return {ok, "E2 failures " + std::to_string(e2_fail) + " (limit " + std::to_string(limit4) + ", L4 " +
                  fmt(cell.lemma4) + "), E3 failures " + std::to_string(e3_fail) + " (limit " +
                  std::to_string(limit6) + ", L6 " + fmt(cell.lemma6) + ")"};
}

Outcome criterion8() {
  double worst = 0.0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    const int m = 2 + static_cast<int>(seed % 49);
    const int rank = seed % 4 == 0 ? std::max(1, m - 2) : m + 5;
    const Eigen::MatrixXd psi = oracles::random_psd(m, 5000 + seed, rank);
    worst = std::max(worst, std::abs(kappa(psi) - oracles::bisection_kappa(psi)));
  }
  double fourier_gap = 0.0;
  for (std::size_t m : {2u, 5u, 25u, 65u}) {
    const Population pop(build_fourier(m), MeasureSpec::uniform());
    fourier_gap = std::max(fourier_gap, std::abs(kappa(pop.gram()) - 1.0));
  }
  return {worst <= 1e-10 && fourier_gap <= 1e-6,
          "max gap to bisection " + fmt(worst) + ", max |kappa - 1| for Fourier " + fmt(fourier_gap)};
}

Outcome criterion9() {
  const double edge = 1.0 / 45.0;
  const double above = std::nextafter(edge, 1.0);
  const MembershipFlags at = membership(0.0, 1, edge, 0.1, 1.0, 1.0);
  const MembershipFlags past = membership(0.0, 1, above, 0.1, 1.0, 1.0);
  const bool ok = at.in_lambda1 && at.in_lambda2 && !past.in_lambda1 && !past.in_lambda2;
  return {ok, "rho M = 1/45 passes, next double above fails"};
}

}  // namespace

int main() {
  bool hard_ok = true;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check, bool soft = false) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const char* tag = o.pass ? "PASS" : (soft ? "SOFT-FAIL" : "FAIL");
    std::printf("%s criterion %d (%s): %s\n", tag, id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && !soft) hard_ok = false;
  };

  const ExperimentConfig c4 = ExperimentConfig::parse(criterion4_config);
  c4.validate();
  std::vector<ExperimentRow> rows4;
  try {
    rows4 = run(c4);
  } catch (const std::exception& e) {
    std::printf("criterion 4 experiment failed: %s\n", e.what());
  }
  const Rates rates4 = rows4.empty() ? Rates{} : slopes_of(c4, rows4);

  report(1, "soft-threshold equivalence", criterion1);
  report(2, "brute-force equivalence", criterion2);
  report(6, "exact representation", criterion6);
  report(3, "KKT certificate", [&] {
    record_criterion4_refits(c4, rows4);
    return criterion3();
  });
  report(4, "risk rate", [&] {
    Outcome o = slope_in(rates4.risk, -1.2, -0.8);
    o.pass = o.pass && rates4.nonconverged == 0;
    o.detail += ", non-converged " + std::to_string(rates4.nonconverged);
    return o;
  });
  report(5, "l1 rate", [&] { return slope_in(rates4.l1, -0.7, -0.3); });
  report(7, "lemma bound domination", criterion7);
  report(8, "kappa correctness", criterion8);
  report(9, "coherence gate", criterion9);
  report(10, "reproducibility", [&] {
    const std::string first = rows_csv(rows4);
    const std::string second = rows_csv(run(c4, {.threads = 1}));
    return Outcome{!rows4.empty() && first == second,
                   std::to_string(first.size()) + " bytes, " + (first == second ? "identical" : "different")};
  });
  report(
      11, "Sobolev adaptation",
      [&] {
        const ExperimentConfig c11 = ExperimentConfig::parse(criterion11_config);
        c11.validate();
        return slope_in(slopes_of(c11, run(c11)).risk, -0.85, -0.45);
      },
      true);
  return hard_ok ? 0 : 1;
}
