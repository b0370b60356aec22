#include "sparsagg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "sparsagg/bounds.hpp"
#include "sparsagg/csv.hpp"
#include "sparsagg/error.hpp"
#include "sparsagg/gram.hpp"
#include "sparsagg/stats.hpp"

namespace sparsagg {

Preset parse_preset(const std::string& text) {
  if (text == "linear") return Preset::linear;
  if (text == "fourier-L0k") return Preset::fourier_l0k;
  if (text == "fourier-sobolev") return Preset::fourier_sobolev;
  fail(ErrorKind::config, "unknown preset '" + text + "' (expected linear, fourier-L0k or fourier-sobolev)");
}

std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::linear:
      return "linear";
    case Preset::fourier_l0k:
      return "fourier-L0k";
    case Preset::fourier_sobolev:
      return "fourier-sobolev";
  }
  return "?";
}

namespace {

std::size_t parse_count(const std::string& text, const std::string& key) {
  const long long v = io::parse_int(text);
  require(v >= 0, ErrorKind::config, key + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

bool is_fourier(Preset p) { return p != Preset::linear; }

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  bool noise_set = false;
  for (const auto& [key, value] : io::parse_key_values(text)) {
    require(seen.insert(key).second, ErrorKind::config, "duplicate key '" + key + "'");
    if (key == "preset") {
      c.preset = parse_preset(value);
    } else if (key == "n") {
      for (const auto& item : io::split(value, ',')) c.n.push_back(parse_count(item, "n"));
    } else if (key == "M") {
      c.M = parse_count(value, "M");
    } else if (key == "M_exponent") {
      c.M_exponent = io::parse_double(value);
    } else if (key == "k") {
      c.k = parse_count(value, "k");
    } else if (key == "beta") {
      c.beta = io::parse_double(value);
    } else if (key == "theta") {
      for (const auto& item : io::split(value, ',')) {
        const auto parts = io::split(item, ':');
        require(parts.size() == 2, ErrorKind::config, "theta entries are <index>:<value>");
        c.theta.emplace_back(parse_count(parts[0], "theta index"), io::parse_double(parts[1]));
      }
    } else if (key == "scale") {
      c.scale = io::parse_double(value);
    } else if (key == "truncation") {
      c.truncation = parse_count(value, "truncation");
    } else if (key == "A") {
      for (const auto& item : io::split(value, ',')) c.A.push_back(io::parse_double(item));
    } else if (key == "rate_kind") {
      const auto [kind, explicit_value] = parse_rate(value);
      require(kind != RateKind::explicit_value, ErrorKind::config, "experiments derive the rate from A");
      c.rate_kind = kind;
    } else if (key == "replicates") {
      c.replicates = parse_count(value, "replicates");
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(parse_count(value, "seed"));
    } else if (key == "C_f") {
      c.C_f = io::parse_double(value);
    } else if (key == "C_f_prime") {
      c.C_f_prime = io::parse_double(value);
    } else if (key == "noise") {
      c.noise = NoiseModel::parse(value);
      noise_set = true;
    } else if (key == "out") {
      c.out = value;
    } else if (key == "tol") {
      c.tol = io::parse_double(value);
    } else if (key == "max_sweeps") {
      c.max_sweeps = parse_count(value, "max_sweeps");
    } else {
      fail(ErrorKind::config, "unknown experiment key '" + key + "'");
    }
  }
  if (!noise_set) c.noise = NoiseModel::parse("uniform:1");
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) { return parse(io::read_text(path)); }

void ExperimentConfig::validate() const {
  require(!n.empty(), ErrorKind::config, "n needs at least one value");
  for (std::size_t i = 0; i < n.size(); ++i) {
    require(n[i] >= 2, ErrorKind::config, "sample sizes must be at least 2");
    if (i > 0) require(n[i] > n[i - 1], ErrorKind::config, "n values must be strictly increasing");
  }
  require(M.has_value() != M_exponent.has_value(), ErrorKind::config, "set exactly one of M and M_exponent");
  if (M) require(*M >= 2, ErrorKind::config, "M must be at least 2");
  if (M_exponent) {
    require(preset != Preset::linear, ErrorKind::config, "the linear preset needs a fixed M");
    require(*M_exponent > 0.0 && *M_exponent <= 1.0, ErrorKind::config, "M_exponent must lie in (0, 1]");
    for (std::size_t size : n) {
      require(dictionary_size(size) >= 2, ErrorKind::config, "n^M_exponent must be at least 2 for every n");
    }
  }
  require(!A.empty(), ErrorKind::config, "A needs at least one value");
  for (double a : A) require(a > 0.0 && std::isfinite(a), ErrorKind::config, "A values must be positive");
  require(replicates >= 1, ErrorKind::config, "replicates must be at least 1");
  if (is_fourier(preset)) require(replicates >= 30, ErrorKind::config, "rate presets need at least 30 replicates");
  require(replicates <= 1000000, ErrorKind::config, "replicates must stay below 10^6 for seed splitting");
  require(C_f >= 0.0 && C_f_prime >= 0.0, ErrorKind::config, "C_f and C_f_prime must be nonnegative");
  require(tol > 0.0, ErrorKind::config, "tol must be positive");
  require(max_sweeps >= 1, ErrorKind::config, "max_sweeps must be at least 1");
  noise.validate();
  for (const auto& [j, v] : theta) require(j >= 1, ErrorKind::config, "theta indices are 1-based");
  switch (preset) {
    case Preset::fourier_l0k:
      require(k.has_value(), ErrorKind::config, "fourier-L0k needs k");
      truth(dictionary_size(n.front())).validate_tags();
      break;
    case Preset::fourier_sobolev:
      require(beta.has_value() && *beta > 0.5, ErrorKind::config, "fourier-sobolev needs beta > 1/2");
      require(truncation >= 1, ErrorKind::config, "truncation must be at least 1");
      break;
    case Preset::linear:
      require(k.has_value() || !theta.empty(), ErrorKind::config, "the linear preset needs k or theta");
      if (k) require(*k <= *M, ErrorKind::config, "k cannot exceed M");
      for (const auto& [j, v] : theta) require(j <= *M, ErrorKind::config, "theta index exceeds M");
      break;
  }
}

RateKind ExperimentConfig::effective_rate() const {
  if (rate_kind) return *rate_kind;
  return is_fourier(preset) ? RateKind::log_n : RateKind::log_m;
}

double ExperimentConfig::k_or_beta() const {
  if (preset == Preset::fourier_sobolev) return beta.value_or(0.0);
  if (k) return static_cast<double>(*k);
  return static_cast<double>(std::count_if(theta.begin(), theta.end(), [](const auto& e) { return e.second != 0.0; }));
}

std::size_t ExperimentConfig::dictionary_size(std::size_t sample_size) const {
  if (M) return *M;
  return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(sample_size), M_exponent.value_or(1.0))));
}

Dictionary ExperimentConfig::dictionary(std::size_t size) const {
  if (preset == Preset::linear) return Dictionary::coordinate(size, size);
  return Dictionary::fourier(size);
}

MeasureSpec ExperimentConfig::measure(std::size_t size) const {
  if (preset == Preset::linear) return MeasureSpec::uniform(Box::unit(size));
  return MeasureSpec::uniform(Box::unit(1));
}

TruthSpec ExperimentConfig::truth(std::size_t size) const {
  switch (preset) {
    case Preset::fourier_l0k: {
      TruthSpec t = [&] {
        if (!theta.empty()) return TruthSpec::fourier_sparse(theta);
        // Default: magnitudes k, k-1, ..., 1 with alternating signs on
        // indices 2, 4, 7, 11, ...
        std::vector<std::pair<std::size_t, double>> entries;
        std::size_t index = 2;
        for (std::size_t i = 0; i < k.value_or(0); ++i) {
          const double magnitude = static_cast<double>(*k - i);
          entries.emplace_back(index, i % 2 == 0 ? magnitude : -magnitude);
          index += i + 2;
        }
        return TruthSpec::fourier_sparse(entries);
      }();
      t.l0_k = k;
      return t;
    }
    case Preset::fourier_sobolev:
      return TruthSpec::sobolev(beta.value_or(1.0), scale, truncation);
    case Preset::linear: {
      Eigen::VectorXd coef = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
      if (!theta.empty()) {
        for (const auto& [j, v] : theta) coef[static_cast<Eigen::Index>(j - 1)] = v;
      } else {
        coef.head(static_cast<Eigen::Index>(k.value_or(0))).setOnes();
      }
      return TruthSpec::linear(std::move(coef), Box::unit(size));
    }
  }
  fail(ErrorKind::config, "unknown preset");
}

std::uint64_t ExperimentConfig::replicate_seed(std::size_t cell, std::size_t replicate) const {
  return seed + 1000000ULL * static_cast<std::uint64_t>(cell) + static_cast<std::uint64_t>(replicate);
}

namespace {

// Populations and targets for every distinct dictionary size in a grid.
struct Grid {
  std::map<std::size_t, std::unique_ptr<Population>> populations;
  std::map<std::size_t, std::unique_ptr<Target>> targets;
  std::vector<CellPlan> cells;
};

double safe_lemma(Lemma which, const LemmaParams& params) {
  try {
    return lemma_bound(which, params);
  } catch (const Error&) {
    return 1.0;
  }
}

Grid build_grid(const ExperimentConfig& config) {
  config.validate();
  Grid grid;
  const double b = config.noise.moment_bound();
  for (std::size_t i = 0; i < config.n.size(); ++i) {
    const std::size_t n = config.n[i];
    const std::size_t m = config.dictionary_size(n);
    if (!grid.populations.count(m)) {
      auto pop = std::make_unique<Population>(config.dictionary(m), config.measure(m));
      grid.targets[m] = std::make_unique<Target>(*pop, config.truth(m));
      grid.populations[m] = std::move(pop);
    }
    const Population& pop = *grid.populations[m];
    const Target& target = *grid.targets[m];
    const double kap = kappa(pop.gram());
    for (std::size_t a = 0; a < config.A.size(); ++a) {
      CellPlan cell;
      cell.index = i * config.A.size() + a;
      cell.n = n;
      cell.M = m;
      cell.A = config.A[a];
      cell.r = rate(cell.A, static_cast<double>(n), m, config.effective_rate());
      cell.kappa = kap;
      cell.oracle = oracle_report(target, cell.r, config.C_f, config.C_f_prime);
      cell.m_lambda_star = sparsity(cell.oracle.lambda_star).count;
      const double ms = static_cast<double>(cell.m_lambda_star);
      cell.regime_ok = ms == 0.0 || static_cast<double>(n) / (ms * ms * std::log(static_cast<double>(m))) >= 1.0;

      LemmaParams p;
      p.n = static_cast<double>(n);
      p.M = static_cast<double>(m);
      p.r = cell.r;
      p.c0 = pop.norms().minCoeff();
      p.L = pop.sup_bound();
      p.L0 = pop.fourth_moment();
      p.b = b;
      p.C_f = config.C_f;
      p.kappa = kap;
      p.m_lambda = ms;
      p.L_lambda = cell.oracle.L_lambda;
      cell.lemma4 = safe_lemma(Lemma::L4, p);
      cell.lemma5 = safe_lemma(Lemma::L5, p);
      cell.lemma6 = safe_lemma(Lemma::L6, p);
      cell.lemma7 = safe_lemma(Lemma::L7, p);
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

}  // namespace

std::vector<CellPlan> plan_cells(const ExperimentConfig& config) { return build_grid(config).cells; }

ExperimentRow run_replicate(const ExperimentConfig& config, const CellPlan& cell, const Population& population,
                            const Target& target, std::size_t rep, bool timing) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentRow row;
  row.preset = preset_name(config.preset);
  row.n = cell.n;
  row.M = cell.M;
  row.k_or_beta = config.k_or_beta();
  row.A = cell.A;
  row.rep = rep;
  row.seed = config.replicate_seed(cell.index, rep);

  const Sample sample = generate(target.truth(), population.measure(), config.noise, cell.n, row.seed);
  const DesignMatrix design = population.dictionary().evaluate(sample.x);
  const PenaltyConfig penalty =
      PenaltyConfig::make(cell.A, config.effective_rate(), empirical_norms(design), cell.n);
  FitOptions options;
  options.tol = config.tol;
  options.max_sweeps = config.max_sweeps;
  LassoFit result;
  try {
    result = fit(design, sample.y, penalty, options);
  } catch (const NonConvergenceError& e) {
    result = e.partial();
  }

  const Eigen::VectorXd& lambda_star = cell.oracle.lambda_star;
  row.risk = target.dist2(result.coefficients);
  row.l1_err = (result.coefficients - lambda_star).lpNorm<1>();
  row.m_hat = result.sparsity();
  row.kkt = result.kkt_residual;
  const EventFlags events =
      event_diagnostics(design, sample.noise, sample.truth_values, penalty.weights, population.gram().diagonal(),
                        lambda_star, cell.oracle.dist2, penalty.rate);
  row.e1 = events.e1;
  row.e2 = events.e2;
  row.e3 = events.e3;
  if (cell.kappa > 0.0) {
    const BoundConstants unit;
    row.rhs_t21_risk = theorem_rhs(TheoremKind::t21_risk, unit, cell.r, cell.m_lambda_star, cell.kappa, 0.0);
    row.rhs_t21_l1 = theorem_rhs(TheoremKind::t21_l1, unit, cell.r, cell.m_lambda_star, cell.kappa, 0.0);
  } else {
    row.rhs_t21_risk = row.rhs_t21_l1 = std::numeric_limits<double>::infinity();
  }
  if (timing) {
    row.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

std::vector<ExperimentRow> run(const ExperimentConfig& config, const RunOptions& options) {
  const Grid grid = build_grid(config);
  const std::size_t reps = config.replicates;
  const std::size_t jobs = grid.cells.size() * reps;
  std::vector<ExperimentRow> rows(jobs);

  std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(jobs, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      const CellPlan& cell = grid.cells[job / reps];
      try {
        rows[job] = run_replicate(config, cell, *grid.populations.at(cell.M), *grid.targets.at(cell.M),
                                  job % reps, options.timing);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

const char* const rows_header =
    "preset,n,M,k_or_beta,A,rep,seed,risk,l1_err,m_hat,kkt,e1,e2,e3,rhs_t21_risk,rhs_t21_l1,runtime_ms";

std::string rows_csv(const std::vector<ExperimentRow>& rows) {
  using io::format_double;
  std::string out = rows_header;
  out += '\n';
  for (const auto& r : rows) {
    out += r.preset + ',' + std::to_string(r.n) + ',' + std::to_string(r.M) + ',' + format_double(r.k_or_beta) +
           ',' + format_double(r.A) + ',' + std::to_string(r.rep) + ',' + std::to_string(r.seed) + ',' +
           format_double(r.risk) + ',' + format_double(r.l1_err) + ',' + std::to_string(r.m_hat) + ',' +
           format_double(r.kkt) + ',' + (r.e1 ? "1" : "0") + ',' + (r.e2 ? "1" : "0") + ',' +
           (r.e3 ? "1" : "0") + ',' + format_double(r.rhs_t21_risk) + ',' + format_double(r.rhs_t21_l1) + ',' +
           format_double(r.runtime_ms) + '\n';
  }
  return out;
}

std::vector<ExperimentRow> read_rows(const std::filesystem::path& path) {
  const auto records = io::read_records(path);
  require(!records.empty(), ErrorKind::io, path.string() + ": empty rows file");
  require(records.front() == io::split(rows_header, ','), ErrorKind::io, path.string() + ": unexpected header");
  std::vector<ExperimentRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    require(f.size() == 17, ErrorKind::io, path.string() + ": row " + std::to_string(i) + " has the wrong width");
    auto count = [&](const std::string& s) {
      const long long v = io::parse_int(s);
      require(v >= 0, ErrorKind::io, path.string() + ": negative count");
      return static_cast<std::size_t>(v);
    };
    auto flag = [&](const std::string& s) {
      require(s == "0" || s == "1", ErrorKind::io, path.string() + ": event flags are 0 or 1");
      return s == "1";
    };
    ExperimentRow r;
    r.preset = f[0];
    r.n = count(f[1]);
    r.M = count(f[2]);
    r.k_or_beta = io::parse_double(f[3]);
    r.A = io::parse_double(f[4]);
    r.rep = count(f[5]);
    r.seed = static_cast<std::uint64_t>(count(f[6]));
    r.risk = io::parse_double(f[7]);
    r.l1_err = io::parse_double(f[8]);
    r.m_hat = count(f[9]);
    r.kkt = io::parse_double(f[10]);
    r.e1 = flag(f[11]);
    r.e2 = flag(f[12]);
    r.e3 = flag(f[13]);
    r.rhs_t21_risk = io::parse_double(f[14]);
    r.rhs_t21_l1 = io::parse_double(f[15]);
    r.runtime_ms = io::parse_double(f[16]);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

const CellPlan* find_cell(const std::vector<CellPlan>& cells, std::size_t n, double A) {
  for (const auto& c : cells) {
    if (c.n == n && c.A == A) return &c;
  }
  return nullptr;
}

// Rows grouped by cell, in plan order.
std::vector<std::pair<const CellPlan*, std::vector<const ExperimentRow*>>> group_rows(
    const std::vector<ExperimentRow>& rows, const std::vector<CellPlan>& cells) {
  std::map<std::size_t, std::vector<const ExperimentRow*>> by_index;
  for (const auto& r : rows) {
    const CellPlan* cell = find_cell(cells, r.n, r.A);
    require(cell != nullptr, ErrorKind::validation,
            "row with n=" + std::to_string(r.n) + ", A=" + io::format_double(r.A) + " is not in the configured grid");
    by_index[cell->index].push_back(&r);
  }
  std::vector<std::pair<const CellPlan*, std::vector<const ExperimentRow*>>> out;
  for (const auto& cell : cells) {
    auto it = by_index.find(cell.index);
    if (it != by_index.end()) out.emplace_back(&cell, std::move(it->second));
  }
  return out;
}

}  // namespace

std::vector<CellSummary> summarize(const std::vector<ExperimentRow>& rows, const std::vector<CellPlan>& cells,
                                   double tol) {
  std::vector<CellSummary> out;
  for (const auto& [cell, members] : group_rows(rows, cells)) {
    CellSummary s;
    const ExperimentRow& first = *members.front();
    s.preset = first.preset;
    s.n = cell->n;
    s.M = cell->M;
    s.k_or_beta = first.k_or_beta;
    s.A = cell->A;
    s.replicates = members.size();
    s.regime_ok = cell->regime_ok;
    s.m_lambda_star = cell->m_lambda_star;
    s.kappa = cell->kappa;
    s.lemma4 = cell->lemma4;
    s.lemma5 = cell->lemma5;
    s.lemma6 = cell->lemma6;
    s.lemma7 = cell->lemma7;
    std::vector<double> risk, l1, m_hat, rhs_risk, rhs_l1;
    for (const ExperimentRow* r : members) {
      risk.push_back(r->risk);
      l1.push_back(r->l1_err);
      m_hat.push_back(static_cast<double>(r->m_hat));
      rhs_risk.push_back(r->rhs_t21_risk);
      rhs_l1.push_back(r->rhs_t21_l1);
      s.max_kkt = std::max(s.max_kkt, r->kkt);
      if (r->kkt > 1e3 * tol) ++s.nonconverged;
      s.freq_e1 += r->e1 ? 1.0 : 0.0;
      s.freq_e2 += r->e2 ? 1.0 : 0.0;
      s.freq_e3 += r->e3 ? 1.0 : 0.0;
    }
    const double count = static_cast<double>(members.size());
    s.freq_e1 /= count;
    s.freq_e2 /= count;
    s.freq_e3 /= count;
    s.valid = static_cast<double>(s.nonconverged) <= 0.2 * count;
    s.median_risk = median(risk);
    s.median_l1_err = median(l1);
    s.median_m_hat = median(m_hat);
    s.rhs_t21_risk = median(rhs_risk);
    s.rhs_t21_l1 = median(rhs_l1);
    out.push_back(std::move(s));
  }
  return out;
}

std::string summary_csv(const std::vector<CellSummary>& cells) {
  using io::format_double;
  std::string out =
      "preset,n,M,k_or_beta,A,replicates,nonconverged,valid,regime_ok,m_lambda_star,kappa,median_risk,"
      "median_l1_err,median_m_hat,max_kkt,freq_e1,freq_e2,freq_e3,rhs_t21_risk,rhs_t21_l1,lemma4,lemma5,lemma6,"
      "lemma7\n";
  for (const auto& c : cells) {
    out += c.preset + ',' + std::to_string(c.n) + ',' + std::to_string(c.M) + ',' + format_double(c.k_or_beta) +
           ',' + format_double(c.A) + ',' + std::to_string(c.replicates) + ',' + std::to_string(c.nonconverged) +
           ',' + (c.valid ? "1" : "0") + ',' + (c.regime_ok ? "1" : "0") + ',' + std::to_string(c.m_lambda_star) +
           ',' + format_double(c.kappa) + ',' + format_double(c.median_risk) + ',' +
           format_double(c.median_l1_err) + ',' + format_double(c.median_m_hat) + ',' + format_double(c.max_kkt) +
           ',' + format_double(c.freq_e1) + ',' + format_double(c.freq_e2) + ',' + format_double(c.freq_e3) + ',' +
           format_double(c.rhs_t21_risk) + ',' + format_double(c.rhs_t21_l1) + ',' + format_double(c.lemma4) +
           ',' + format_double(c.lemma5) + ',' + format_double(c.lemma6) + ',' + format_double(c.lemma7) + '\n';
  }
  return out;
}

SlopeResult rate_slope(const std::vector<double>& n, const std::vector<double>& medians) {
  require(n.size() == medians.size(), ErrorKind::shape, "n and medians differ in length");
  require(n.size() >= 4, ErrorKind::validation, "a rate slope needs at least four grid points");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n.size(); ++i) {
    require(n[i] > std::exp(1.0), ErrorKind::validation, "n must exceed e for log(n / log n)");
    require(medians[i] > 0.0 && std::isfinite(medians[i]), ErrorKind::numeric, "medians must be positive");
    x.push_back(std::log(n[i] / std::log(n[i])));
    y.push_back(std::log(medians[i]));
  }
  const LineFit line = ols(x, y);
  SlopeResult out;
  out.points = line.points;
  out.slope = line.slope;
  out.intercept = line.intercept;
  out.stderr_slope = line.stderr_slope;
  return out;
}

std::vector<SlopeResult> rate_slopes(const std::vector<CellSummary>& cells) {
  struct Key {
    std::string preset;
    double k_or_beta;
    double A;
    bool operator==(const Key&) const = default;
  };
  std::vector<Key> order;
  for (const auto& c : cells) {
    const Key key{c.preset, c.k_or_beta, c.A};
    if (std::find(order.begin(), order.end(), key) == order.end()) order.push_back(key);
  }
  std::vector<SlopeResult> out;
  for (const auto& key : order) {
    for (SlopeMetric metric : {SlopeMetric::risk, SlopeMetric::l1_err}) {
      std::vector<double> ns, meds;
      for (const auto& c : cells) {
        if (c.preset != key.preset || c.k_or_beta != key.k_or_beta || c.A != key.A) continue;
        if (!c.valid || !c.regime_ok) continue;
        const double value = metric == SlopeMetric::risk ? c.median_risk : c.median_l1_err;
        if (!(value > 0.0)) continue;
        ns.push_back(static_cast<double>(c.n));
        meds.push_back(value);
      }
      if (ns.size() < 4) continue;
      SlopeResult s = rate_slope(ns, meds);
      s.preset = key.preset;
      s.k_or_beta = key.k_or_beta;
      s.A = key.A;
      s.metric = metric;
      out.push_back(s);
    }
  }
  return out;
}

std::string slopes_csv(const std::vector<SlopeResult>& slopes) {
  using io::format_double;
  std::string out = "preset,k_or_beta,A,metric,points,slope,intercept,stderr\n";
  for (const auto& s : slopes) {
    out += s.preset + ',' + format_double(s.k_or_beta) + ',' + format_double(s.A) + ',' +
           (s.metric == SlopeMetric::risk ? "risk" : "l1_err") + ',' + std::to_string(s.points) + ',' +
           format_double(s.slope) + ',' + format_double(s.intercept) + ',' + format_double(s.stderr_slope) + '\n';
  }
  return out;
}

std::vector<BoundCheckCell> bound_check(const std::vector<ExperimentRow>& rows,
                                        const std::vector<CellPlan>& cells, const BoundCheckOptions& options) {
  require(options.kind == TheoremKind::t21_risk || options.kind == TheoremKind::t21_l1, ErrorKind::unsupported,
          "rows record only the T2.1 right-hand sides");
  if (!options.fit) options.constants.validate();
  const bool risk_kind = options.kind == TheoremKind::t21_risk;
  std::vector<BoundCheckCell> out;
  for (const auto& [cell, members] : group_rows(rows, cells)) {
    BoundCheckCell result;
    result.n = cell->n;
    result.A = cell->A;
    auto metric = [&](const ExperimentRow* r) { return risk_kind ? r->risk : r->l1_err; };
    auto unit_rhs = [&](const ExperimentRow* r) { return risk_kind ? r->rhs_t21_risk : r->rhs_t21_l1; };

    std::vector<const ExperimentRow*> evaluated;
    double constant = risk_kind ? options.constants.B1 : options.constants.B2;
    if (options.fit) {
      const std::size_t half = members.size() / 2;
      double needed = 0.0;
      for (const ExperimentRow* r : members) {
        if (r->rep < half) {
          const double ratio = unit_rhs(r) > 0.0 ? metric(r) / unit_rhs(r)
                                                 : (metric(r) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
          needed = std::max(needed, ratio);
        } else {
          evaluated.push_back(r);
        }
      }
      constant = needed;
    } else {
      evaluated = members;
    }
    result.constant = constant;
    result.evaluated = evaluated.size();
    if (evaluated.empty()) {
      out.push_back(result);
      continue;
    }
    std::vector<double> values, rhs;
    std::size_t hits = 0;
    for (const ExperimentRow* r : evaluated) {
      const double bound =
          options.infinite_rhs ? std::numeric_limits<double>::infinity() : constant * unit_rhs(r);
      values.push_back(metric(r));
      rhs.push_back(bound);
      if (metric(r) <= bound) ++hits;
    }
    result.quantile95 = quantile(values, 0.95);
    result.rhs = median(rhs);
    result.satisfied_fraction = static_cast<double>(hits) / static_cast<double>(evaluated.size());
    result.target = 1.0 - std::clamp(cell->lemma5 + cell->lemma6 + cell->lemma7, 0.0, 1.0);
    result.satisfied = result.satisfied_fraction >= result.target;
    out.push_back(result);
  }
  return out;
}

std::string bound_check_csv(const std::vector<BoundCheckCell>& cells) {
  using io::format_double;
  std::string out = "n,A,evaluated,constant,quantile95,rhs,satisfied_fraction,target,satisfied\n";
  for (const auto& c : cells) {
    out += std::to_string(c.n) + ',' + format_double(c.A) + ',' + std::to_string(c.evaluated) + ',' +
           format_double(c.constant) + ',' + format_double(c.quantile95) + ',' + format_double(c.rhs) + ',' +
           format_double(c.satisfied_fraction) + ',' + format_double(c.target) + ',' +
           (c.satisfied ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace sparsagg
