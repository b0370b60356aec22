#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sparsagg/dictionary.hpp"
#include "sparsagg/measure.hpp"
#include "sparsagg/noise.hpp"
#include "sparsagg/oracle.hpp"
#include "sparsagg/solver.hpp"
#include "sparsagg/truth.hpp"

namespace sparsagg {

enum class Preset { linear, fourier_l0k, fourier_sobolev };

Preset parse_preset(const std::string& text);
std::string preset_name(Preset preset);

/// Replicated simulation grid over n and A. Text form is one `key=value`
/// per line with comma-separated lists:
///
///   preset      linear | fourier-L0k | fourier-sobolev
///   n           strictly increasing sample sizes
///   M           fixed dictionary size, or
///   M_exponent  s with M = floor(n^s)
///   k           nonzero coefficients (linear, fourier-L0k)
///   beta        smoothness (fourier-sobolev)
///   theta       <index>:<value> list overriding the default coefficients
///   scale, truncation   Sobolev coefficient scale and number of terms
///   A           tuning constants
///   rate_kind   logM | logn (default logn for Fourier presets, logM for linear)
///   replicates, seed, C_f, C_f_prime, noise, out, tol, max_sweeps
struct ExperimentConfig {
  Preset preset = Preset::fourier_l0k;
  std::vector<std::size_t> n;
  std::optional<std::size_t> M;
  std::optional<double> M_exponent;
  std::optional<std::size_t> k;
  std::optional<double> beta;
  std::vector<std::pair<std::size_t, double>> theta;
  double scale = 1.0;
  std::size_t truncation = 101;
  std::vector<double> A;
  std::optional<RateKind> rate_kind;
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
  double C_f = 1.0;
  double C_f_prime = 1.0;
  NoiseModel noise;
  std::string out;
  double tol = 1e-9;
  std::size_t max_sweeps = 100000;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  void validate() const;

  RateKind effective_rate() const;
  double k_or_beta() const;
  std::size_t dictionary_size(std::size_t sample_size) const;
  Dictionary dictionary(std::size_t size) const;
  MeasureSpec measure(std::size_t size) const;
  TruthSpec truth(std::size_t size) const;

  std::size_t cell_count() const { return n.size() * A.size(); }
  /// seed + 10^6 cell + replicate.
  std::uint64_t replicate_seed(std::size_t cell, std::size_t replicate) const;
};

/// Per-cell population quantities shared by all replicates of the cell.
struct CellPlan {
  std::size_t index = 0;
  std::size_t n = 0;
  std::size_t M = 0;
  double A = 0.0;
  double r = 0.0;
  double kappa = 0.0;
  OracleReport oracle;
  std::size_t m_lambda_star = 0;
  bool regime_ok = false;  // n / (M(lambda*)^2 log M) >= 1
  double lemma4 = 1.0;
  double lemma5 = 1.0;
  double lemma6 = 1.0;
  double lemma7 = 1.0;
};

std::vector<CellPlan> plan_cells(const ExperimentConfig& config);

struct ExperimentRow {
  std::string preset;
  std::size_t n = 0;
  std::size_t M = 0;
  double k_or_beta = 0.0;
  double A = 0.0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double risk = 0.0;
  double l1_err = 0.0;
  std::size_t m_hat = 0;
  double kkt = 0.0;
  bool e1 = false;
  bool e2 = false;
  bool e3 = false;
  double rhs_t21_risk = 0.0;  // r^2 M(lambda*) / kappa, unit constant
  double rhs_t21_l1 = 0.0;    // r M(lambda*) / kappa, unit constant
  double runtime_ms = 0.0;
};

struct RunOptions {
  std::size_t threads = 0;  // 0 picks the hardware concurrency
  bool timing = false;      // fill runtime_ms; otherwise it is written as 0
};

/// Runs one replicate of a planned cell. Depends only on its arguments.
ExperimentRow run_replicate(const ExperimentConfig& config, const CellPlan& cell, const Population& population,
                            const Target& target, std::size_t rep, bool timing = false);

std::vector<ExperimentRow> run(const ExperimentConfig& config, const RunOptions& options = {});

extern const char* const rows_header;
std::string rows_csv(const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> read_rows(const std::filesystem::path& path);

struct CellSummary {
  std::string preset;
  std::size_t n = 0;
  std::size_t M = 0;
  double k_or_beta = 0.0;
  double A = 0.0;
  std::size_t replicates = 0;
  std::size_t nonconverged = 0;
  bool valid = true;  // at most 20% non-converged
  bool regime_ok = true;
  std::size_t m_lambda_star = 0;
  double kappa = 0.0;
  double median_risk = 0.0;
  double median_l1_err = 0.0;
  double median_m_hat = 0.0;
  double max_kkt = 0.0;
  double freq_e1 = 0.0;
  double freq_e2 = 0.0;
  double freq_e3 = 0.0;
  double rhs_t21_risk = 0.0;
  double rhs_t21_l1 = 0.0;
  double lemma4 = 1.0;
  double lemma5 = 1.0;
  double lemma6 = 1.0;
  double lemma7 = 1.0;
};

/// Groups rows by (n, A) cell. `cells` supplies the population side; rows
/// whose cell is absent from the plan raise a validation error.
std::vector<CellSummary> summarize(const std::vector<ExperimentRow>& rows, const std::vector<CellPlan>& cells,
                                   double tol);

std::string summary_csv(const std::vector<CellSummary>& cells);

enum class SlopeMetric { risk, l1_err };

struct SlopeResult {
  std::string preset;
  double k_or_beta = 0.0;
  double A = 0.0;
  SlopeMetric metric = SlopeMetric::risk;
  std::size_t points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// OLS of log(median) on log(n / log n); needs at least four points.
SlopeResult rate_slope(const std::vector<double>& n, const std::vector<double>& medians);

/// One slope per (preset, k_or_beta, A) group and metric over valid cells
/// inside the regime. Groups with fewer than four such cells are skipped.
std::vector<SlopeResult> rate_slopes(const std::vector<CellSummary>& cells);

std::string slopes_csv(const std::vector<SlopeResult>& slopes);

struct BoundCheckCell {
  std::size_t n = 0;
  double A = 0.0;
  std::size_t evaluated = 0;
  double quantile95 = 0.0;     // of the metric over evaluated replicates
  double rhs = 0.0;            // median scaled right-hand side
  double satisfied_fraction = 0.0;
  double target = 1.0;         // 1 - lemma total, clamped
  bool satisfied = false;
  double constant = 1.0;       // B used for this cell
};

struct BoundCheckOptions {
  TheoremKind kind = TheoremKind::t21_risk;
  BoundConstants constants;
  bool fit = false;  // fit B on replicates rep < R/2 and evaluate on the rest
  bool infinite_rhs = false;  // sanity mode: every replicate satisfies the bound
};

/// Fraction of replicates with metric <= RHS per cell, compared with
/// 1 - (lemma5 + lemma6 + lemma7). Only the T2.1 kinds are recorded in rows.
std::vector<BoundCheckCell> bound_check(const std::vector<ExperimentRow>& rows,
                                        const std::vector<CellPlan>& cells, const BoundCheckOptions& options);

std::string bound_check_csv(const std::vector<BoundCheckCell>& cells);

}  // namespace sparsagg
