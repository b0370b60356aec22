#include "sparsagg/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <ostream>
#include <sstream>

#include "sparsagg/bounds.hpp"
#include "sparsagg/csv.hpp"
#include "sparsagg/dictionary.hpp"
#include "sparsagg/error.hpp"
#include "sparsagg/experiment.hpp"
#include "sparsagg/gram.hpp"
#include "sparsagg/oracle.hpp"
#include "sparsagg/population.hpp"
#include "sparsagg/solver.hpp"
#include "sparsagg/truth.hpp"

namespace sparsagg::cli {

namespace {

using io::format_double;

std::string join_support(const std::vector<std::size_t>& support) {
  std::string s;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(support[i] + 1);
  }
  return s;
}

MeasureSpec parse_measure(const std::string& text, const Dictionary& dict, std::size_t resolution) {
  if (text == "uniform") return MeasureSpec::uniform(dict.domain(), resolution);
  if (text.rfind("grid:", 0) == 0) {
    const auto csv = io::read_numeric(text.substr(5));
    require(csv.header.size() == 1, ErrorKind::io, "density file must have a single column");
    std::vector<double> values;
    for (const auto& row : csv.rows) values.push_back(row[0]);
    return MeasureSpec::grid_density(std::move(values), dict.domain(), resolution);
  }
  fail(ErrorKind::config, "measure must be 'uniform' or 'grid:<density csv>'");
}

struct Data {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Data load_data(const std::string& path, const Dictionary& dict, bool need_y) {
  const auto csv = io::read_numeric(path);
  require(!csv.rows.empty(), ErrorKind::io, path + ": no data rows");
  const int y_col = csv.column("y");
  require(!need_y || y_col >= 0, ErrorKind::io, path + ": missing column 'y'");
  std::vector<std::size_t> x_cols;
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    if (static_cast<int>(c) != y_col) x_cols.push_back(c);
  }
  require(x_cols.size() == dict.dim(), ErrorKind::shape,
          path + ": expected " + std::to_string(dict.dim()) + " input columns, found " +
              std::to_string(x_cols.size()));
  Data d;
  const auto n = static_cast<Eigen::Index>(csv.rows.size());
  d.x.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  d.y.resize(y_col >= 0 ? n : 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    for (std::size_t a = 0; a < x_cols.size(); ++a) d.x(i, static_cast<Eigen::Index>(a)) = row[x_cols[a]];
    if (y_col >= 0) d.y[i] = row[static_cast<std::size_t>(y_col)];
  }
  return d;
}

std::vector<std::size_t> parse_support(const std::string& text, std::size_t size) {
  std::vector<std::size_t> out;
  if (io::trim(text).empty()) return out;
  for (const auto& item : io::split(text, ',')) {
    const long long j = io::parse_int(item);
    require(j >= 1 && static_cast<std::size_t>(j) <= size, ErrorKind::config, "support index out of range");
    out.push_back(static_cast<std::size_t>(j - 1));
  }
  return out;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io:
      return io_error;
    case ErrorKind::numeric:
      return numeric_error;
    case ErrorKind::non_convergence:
      return non_convergence;
    default:
      return usage;
  }
}

struct FitArgs {
  std::string dict, data, rate = "logM", out;
  double A = 1.0, tol = 1e-9;
  std::size_t max_sweeps = 100000;
};

int run_fit(const FitArgs& a, std::ostream& out) {
  const Dictionary dict = parse_dictionary(a.dict);
  const Data data = load_data(a.data, dict, true);
  const DesignMatrix design = dict.evaluate(data.x);
  const auto [kind, explicit_rate] = parse_rate(a.rate);
  const PenaltyConfig penalty =
      PenaltyConfig::make(a.A, kind, empirical_norms(design), static_cast<std::size_t>(data.y.size()), explicit_rate);
  FitOptions options;
  options.tol = a.tol;
  options.max_sweeps = a.max_sweeps;
  LassoFit result;
  int code = ok;
  try {
    result = fit(design, data.y, penalty, options);
  } catch (const NonConvergenceError& e) {
    result = e.partial();
    code = non_convergence;
  }
  std::string csv = "j,lambda,omega\n";
  for (Eigen::Index j = 0; j < result.coefficients.size(); ++j) {
    csv += std::to_string(j + 1) + ',' + format_double(result.coefficients[j]) + ',' +
           format_double(penalty.weights[j]) + '\n';
  }
  io::write_atomic(a.out, csv);
  out << format_report({{"n", std::to_string(data.y.size())},
                        {"M", std::to_string(dict.size())},
                        {"rate", format_double(penalty.rate)},
                        {"objective", format_double(result.objective)},
                        {"kkt_residual", format_double(result.kkt_residual)},
                        {"sweeps", std::to_string(result.sweeps)},
                        {"converged", result.converged ? "1" : "0"},
                        {"support_size", std::to_string(result.sparsity())},
                        {"support", join_support(result.support)}});
  return code;
}

struct DiagnoseArgs {
  std::string dict, measure = "uniform", data, support, gram_out, empirical_gram_out;
  std::size_t resolution = 4096;
};

int run_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  const Dictionary dict = parse_dictionary(a.dict);
  const MeasureSpec measure = parse_measure(a.measure, dict, a.resolution);
  const Population pop(dict, measure);
  const Eigen::MatrixXd& psi = pop.gram();
  const DictionaryValidation v = validate_a2(dict, measure);
  std::vector<std::pair<std::string, std::string>> report = {
      {"M", std::to_string(dict.size())},
      {"L", format_double(v.sup_bound)},
      {"sup_grid_points", std::to_string(v.sup_grid_points)},
      {"c0", format_double(v.min_norm)},
      {"L0", format_double(v.fourth_moment)},
      {"assumptions_satisfied", v.satisfied() ? "1" : "0"},
  };
  if (v.min_norm > 0.0) {
    report.emplace_back("kappa", format_double(kappa(psi)));
    const CoherenceReport coh = coherence(psi, parse_support(a.support, dict.size()));
    double max_rho = 0.0;
    for (Eigen::Index i = 0; i < coh.rho.rows(); ++i) {
      for (Eigen::Index j = 0; j < coh.rho.cols(); ++j) {
        if (i != j) max_rho = std::max(max_rho, std::abs(coh.rho(i, j)));
      }
    }
    report.emplace_back("max_coherence", format_double(max_rho));
    if (!a.support.empty()) report.emplace_back("rho_lambda", format_double(coh.rho_lambda));
  } else {
    report.emplace_back("kappa", "undefined");
  }
  Eigen::MatrixXd empirical;
  if (!a.data.empty()) {
    const Data data = load_data(a.data, dict, false);
    const GramPair pair = gram_pair(pop, dict.evaluate(data.x));
    empirical = pair.empirical;
    report.emplace_back("n", std::to_string(data.x.rows()));
    report.emplace_back("eta", format_double(eta(pair)));
  }
  if (!a.gram_out.empty()) io::write_atomic(a.gram_out, io::matrix_csv(psi));
  if (!a.empirical_gram_out.empty()) {
    require(empirical.size() > 0, ErrorKind::config, "--empirical-gram-out needs --data");
    io::write_atomic(a.empirical_gram_out, io::matrix_csv(empirical));
  }
  out << format_report(report);
  return ok;
}

struct OracleArgs {
  std::string dict, truth, measure = "uniform", k, out;
  std::size_t resolution = 4096;
};

int run_oracle(const OracleArgs& a, std::ostream& out) {
  const Dictionary dict = parse_dictionary(a.dict);
  const MeasureSpec measure = parse_measure(a.measure, dict, a.resolution);
  const Population pop(dict, measure);
  const Target target(pop, TruthSpec::parse(a.truth));
  std::size_t lo = 0, hi = dict.size();
  if (!a.k.empty()) {
    const auto parts = io::split(a.k, ':');
    require(parts.size() <= 2, ErrorKind::config, "--k is <k> or <from>:<to>");
    lo = static_cast<std::size_t>(io::parse_int(parts[0]));
    hi = parts.size() == 2 ? static_cast<std::size_t>(io::parse_int(parts[1])) : lo;
    require(lo <= hi, ErrorKind::config, "--k range is empty");
  }
  std::string csv = "k,residual2,support,exact\n";
  for (std::size_t k = lo; k <= hi; ++k) {
    const OracleSolution s = oracle_best(target, k);
    csv += std::to_string(k) + ',' + format_double(s.residual2) + ',' + join_support(s.support) + ',' +
           (s.exact ? "1" : "0") + '\n';
  }
  if (a.out.empty()) {
    out << csv;
  } else {
    io::write_atomic(a.out, csv);
  }
  return ok;
}

struct BoundsArgs {
  std::string params;
  std::vector<std::string> lemmas;
};

int run_bounds(const BoundsArgs& a, std::ostream& out) {
  auto entries = io::parse_key_values(io::read_text(a.params));
  std::optional<double> epsilon, w2, d;
  std::vector<std::pair<std::string, std::string>> lemma_entries;
  for (const auto& [key, value] : entries) {
    if (key == "epsilon") epsilon = io::parse_double(value);
    else if (key == "w2") w2 = io::parse_double(value);
    else if (key == "d") d = io::parse_double(value);
    else lemma_entries.emplace_back(key, value);
  }
  const LemmaParams params = LemmaParams::from_key_values(lemma_entries);
  std::vector<std::pair<std::string, std::string>> report;
  if (a.lemmas.empty()) {
    for (Lemma which : all_lemmas) {
      try {
        report.emplace_back(lemma_name(which), format_double(lemma_bound(which, params)));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::config) throw;
        report.emplace_back(lemma_name(which), "unavailable");
      }
    }
  } else {
    for (const auto& name : a.lemmas) {
      const Lemma which = parse_lemma(name);
      report.emplace_back(lemma_name(which), format_double(lemma_bound(which, params)));
    }
  }
  if (epsilon && w2 && d && params.n) {
    report.emplace_back("bernstein", format_double(bernstein_bound(*params.n, *epsilon, *w2, *d)));
  }
  out << format_report(report);
  return ok;
}

struct ExperimentArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  bool timing = false;
};

int run_experiment(const ExperimentArgs& a, std::ostream& out) {
  ExperimentConfig config = ExperimentConfig::load(a.config);
  if (a.seed) config.seed = *a.seed;
  const std::string path = a.out.empty() ? config.out : a.out;
  require(!path.empty(), ErrorKind::config, "no output path: pass --out or set out= in the config");
  RunOptions options;
  options.threads = a.threads;
  options.timing = a.timing;
  const auto rows = run(config, options);
  io::write_atomic(path, rows_csv(rows));
  std::size_t nonconverged = 0;
  for (const auto& r : rows) nonconverged += r.kkt > 1e3 * config.tol ? 1 : 0;
  out << format_report({{"rows", std::to_string(rows.size())},
                        {"cells", std::to_string(config.cell_count())},
                        {"nonconverged", std::to_string(nonconverged)},
                        {"out", path}});
  return ok;
}

struct SummaryArgs {
  std::string config, in, out, slopes, bound_out, bound_kind = "T2.1-risk";
  double B1 = 1.0, B2 = 1.0;
  bool fit_constants = false;
};

int run_summary(const SummaryArgs& a, std::ostream& out) {
  const ExperimentConfig config = ExperimentConfig::load(a.config);
  const auto rows = read_rows(a.in);
  const auto cells = plan_cells(config);
  const auto summary = summarize(rows, cells, config.tol);
  io::write_atomic(a.out, summary_csv(summary));
  const auto slopes = rate_slopes(summary);
  if (!a.slopes.empty()) io::write_atomic(a.slopes, slopes_csv(slopes));
  if (!a.bound_out.empty()) {
    BoundCheckOptions options;
    options.kind = parse_theorem_kind(a.bound_kind);
    options.constants.B1 = a.B1;
    options.constants.B2 = a.B2;
    options.fit = a.fit_constants;
    io::write_atomic(a.bound_out, bound_check_csv(bound_check(rows, cells, options)));
  }
  std::vector<std::pair<std::string, std::string>> report = {{"cells", std::to_string(summary.size())}};
  for (const auto& s : slopes) {
    const std::string key = "slope_" + std::string(s.metric == SlopeMetric::risk ? "risk" : "l1_err") + "_A" +
                            format_double(s.A);
    report.emplace_back(key, format_double(s.slope));
  }
  out << format_report(report);
  return ok;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted l1-penalized least squares over function dictionaries", "sparsagg"};
  app.set_version_flag("--version", version_string);
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the weighted l1-penalized estimator to a data file");
  fit_cmd->add_option("--dict", fit_args.dict, "fourier:<M>, coordinate:<d> or tabulated:<csv>")->required();
  fit_cmd->add_option("--data", fit_args.data, "CSV with input columns and a 'y' column")->required();
  fit_cmd->add_option("--A", fit_args.A, "tuning constant")->capture_default_str();
  fit_cmd->add_option("--rate", fit_args.rate, "logM, logn or explicit:<r>")->capture_default_str();
  fit_cmd->add_option("--tol", fit_args.tol, "relative change tolerance")->capture_default_str();
  fit_cmd->add_option("--max-sweeps", fit_args.max_sweeps, "sweep budget")->capture_default_str();
  fit_cmd->add_option("--out", fit_args.out, "coefficient CSV (j,lambda,omega)")->required();

  DiagnoseArgs diag_args;
  auto* diag_cmd = app.add_subcommand("diagnose", "Gram, coherence and kappa diagnostics");
  diag_cmd->add_option("--dict", diag_args.dict, "dictionary shorthand")->required();
  diag_cmd->add_option("--measure", diag_args.measure, "uniform or grid:<density csv>")->capture_default_str();
  diag_cmd->add_option("--resolution", diag_args.resolution, "quadrature points")->capture_default_str();
  diag_cmd->add_option("--data", diag_args.data, "design CSV for the empirical Gram");
  diag_cmd->add_option("--support", diag_args.support, "comma-separated 1-based indices for rho(lambda)");
  diag_cmd->add_option("--gram-out", diag_args.gram_out, "write the population Gram as CSV");
  diag_cmd->add_option("--empirical-gram-out", diag_args.empirical_gram_out, "write the empirical Gram as CSV");

  OracleArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "Best k-term approximations of a truth");
  oracle_cmd->add_option("--dict", oracle_args.dict, "dictionary shorthand")->required();
  oracle_cmd->add_option("--truth", oracle_args.truth, "fourier:<j>:<v>,..., sobolev:<beta>, linear:<v>,... or "
                                                       "tabulated:<csv>")
      ->required();
  oracle_cmd->add_option("--measure", oracle_args.measure, "uniform or grid:<density csv>")->capture_default_str();
  oracle_cmd->add_option("--resolution", oracle_args.resolution, "quadrature points")->capture_default_str();
  oracle_cmd->add_option("--k", oracle_args.k, "<k> or <from>:<to> (default 0:M)");
  oracle_cmd->add_option("--out", oracle_args.out, "CSV path (default standard output)");

  BoundsArgs bounds_args;
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the explicit tail bounds");
  bounds_cmd->add_option("--params", bounds_args.params, "key=value parameter file")->required();
  bounds_cmd->add_option("--lemma", bounds_args.lemmas, "L4, L5, L6, L7 or L9 (repeatable; default all)");

  ExperimentArgs exp_args;
  std::uint64_t exp_seed = 0;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a replicated simulation grid");
  exp_cmd->add_option("--config", exp_args.config, "key=value experiment file")->required();
  exp_cmd->add_option("--out", exp_args.out, "rows CSV (overrides out= in the config)");
  auto* seed_opt = exp_cmd->add_option("--seed", exp_seed, "master seed (overrides seed= in the config)");
  exp_cmd->add_option("--threads", exp_args.threads, "worker threads (0 = all cores)")->capture_default_str();
  exp_cmd->add_flag("--timing", exp_args.timing, "record runtime_ms (output is then not reproducible)");

  SummaryArgs sum_args;
  auto* sum_cmd = app.add_subcommand("summary", "Per-cell medians, rate slopes and bound checks");
  sum_cmd->add_option("--config", sum_args.config, "experiment file the rows came from")->required();
  sum_cmd->add_option("--in", sum_args.in, "rows CSV")->required();
  sum_cmd->add_option("--out", sum_args.out, "per-cell summary CSV")->required();
  sum_cmd->add_option("--slopes", sum_args.slopes, "rate slope CSV");
  sum_cmd->add_option("--bound-check", sum_args.bound_out, "bound check CSV");
  sum_cmd->add_option("--bound-kind", sum_args.bound_kind, "T2.1-risk or T2.1-l1")->capture_default_str();
  sum_cmd->add_option("--B1", sum_args.B1, "risk bound constant")->capture_default_str();
  sum_cmd->add_option("--B2", sum_args.B2, "l1 bound constant")->capture_default_str();
  sum_cmd->add_flag("--fit-constants", sum_args.fit_constants, "fit B on half the replicates");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*fit_cmd) return run_fit(fit_args, out);
    if (*diag_cmd) return run_diagnose(diag_args, out);
    if (*oracle_cmd) return run_oracle(oracle_args, out);
    if (*bounds_cmd) return run_bounds(bounds_args, out);
    if (*exp_cmd) {
      if (seed_opt->count() > 0) exp_args.seed = exp_seed;
      return run_experiment(exp_args, out);
    }
    if (*sum_cmd) return run_summary(sum_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  }
  err << app.help();
  return usage;
}

}  // namespace sparsagg::cli
