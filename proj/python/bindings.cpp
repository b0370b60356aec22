#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

#include "sparsagg/bounds.hpp"
#include "sparsagg/csv.hpp"
#include "sparsagg/error.hpp"
#include "sparsagg/experiment.hpp"
#include "sparsagg/gram.hpp"
#include "sparsagg/oracle.hpp"
#include "sparsagg/population.hpp"
#include "sparsagg/solver.hpp"

namespace py = pybind11;
using namespace sparsagg;

namespace {

py::dict fit_dict(const LassoFit& f, const Eigen::VectorXd& weights) {
  py::dict d;
  d["coefficients"] = f.coefficients;
  d["weights"] = weights;
  d["support"] = f.support;
  d["objective"] = f.objective;
  d["kkt_residual"] = f.kkt_residual;
  d["sweeps"] = f.sweeps;
  d["converged"] = f.converged;
  d["frozen"] = f.frozen;
  return d;
}

FitOptions options(double tol, std::size_t max_sweeps) {
  FitOptions o;
  o.tol = tol;
  o.max_sweeps = max_sweeps;
  return o;
}

MeasureSpec measure_for(const Dictionary& dict, std::size_t resolution) {
  return MeasureSpec::uniform(dict.domain(), resolution);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted l1-penalized aggregation of dictionaries with oracle diagnostics";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "SparsaggError", PyExc_RuntimeError);

  py::class_<Dictionary>(m, "Dictionary")
      .def_static("fourier", [](std::size_t count) { return build_fourier(count); }, py::arg("count"))
      .def_static("coordinate", [](std::size_t dim) { return Dictionary::coordinate(dim, dim); }, py::arg("dim"))
      .def_static("parse", &parse_dictionary, py::arg("shorthand"))
      .def_property_readonly("size", &Dictionary::size)
      .def_property_readonly("dim", &Dictionary::dim)
      .def(
          "evaluate", [](const Dictionary& d, const Eigen::MatrixXd& points) { return d.evaluate(points).values; },
          py::arg("points"), "Design matrix with entry (i, j) = f_j(points[i]).");

  m.def(
      "validate_dictionary",
      [](const Dictionary& d, std::size_t resolution) {
        const DictionaryValidation v = validate_a2(d, measure_for(d, resolution));
        py::dict out;
        out["L"] = v.sup_bound;
        out["c0"] = v.min_norm;
        out["L0"] = v.fourth_moment;
        out["satisfied"] = v.satisfied();
        return out;
      },
      py::arg("dictionary"), py::arg("resolution") = 4096, "Sup bound, minimal norm and fourth moment under uniform mu.");

  m.def(
      "population_gram",
      [](const Dictionary& d, std::size_t resolution) {
        return Population(d, measure_for(d, resolution)).gram();
      },
      py::arg("dictionary"), py::arg("resolution") = 4096);
  m.def(
      "empirical_gram", [](const Eigen::MatrixXd& design) { return empirical_gram(DesignMatrix{design}); },
      py::arg("design"));
  m.def("kappa", &kappa, py::arg("psi"));
  m.def(
      "coherence",
      [](const Eigen::MatrixXd& psi, const std::vector<std::size_t>& support) {
        const CoherenceReport r = coherence(psi, support);
        return py::make_tuple(r.rho, r.rho_lambda);
      },
      py::arg("psi"), py::arg("support"), "Correlation matrix and rho(lambda) for a 0-based support.");
  m.def(
      "eta", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return eta(GramPair{a, b}); },
      py::arg("population"), py::arg("empirical"));

  m.def(
      "rate",
      [](double A, double n, std::size_t M, const std::string& kind) {
        return rate(A, n, M, parse_rate(kind).first);
      },
      py::arg("A"), py::arg("n"), py::arg("M"), py::arg("kind") = "logM");
  m.def("soft_threshold", &soft_threshold, py::arg("z"), py::arg("t"));

  m.def(
      "fit",
      [](const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double A, const std::string& rate_text,
         double tol, std::size_t max_sweeps) {
        const DesignMatrix d{design};
        const auto [kind, value] = parse_rate(rate_text);
        const PenaltyConfig pen =
            PenaltyConfig::make(A, kind, empirical_norms(d), static_cast<std::size_t>(design.rows()), value);
        return fit_dict(fit(d, y, pen, options(tol, max_sweeps)), pen.weights);
      },
      py::arg("design"), py::arg("y"), py::arg("A"), py::arg("rate") = "logM", py::arg("tol") = 1e-9,
      py::arg("max_sweeps") = 100000, "Weighted l1-penalized least squares by coordinate descent.");
  m.def(
      "fit_weights",
      [](const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Eigen::VectorXd& weights, double tol,
         std::size_t max_sweeps) {
        PenaltyConfig pen;
        pen.rate_kind = RateKind::explicit_value;
        pen.rate = 1.0;
        pen.weights = weights;
        return fit_dict(fit(DesignMatrix{design}, y, pen, options(tol, max_sweeps)), weights);
      },
      py::arg("design"), py::arg("y"), py::arg("weights"), py::arg("tol") = 1e-9, py::arg("max_sweeps") = 100000,
      "Same estimator with explicit per-coordinate weights.");
  m.def(
      "kkt_residual",
      [](const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
         const Eigen::VectorXd& lambda) { return kkt_residual(DesignMatrix{design}, y, w, lambda); },
      py::arg("design"), py::arg("y"), py::arg("weights"), py::arg("coefficients"));

  m.def("oracle_fourier", &oracle_fourier, py::arg("theta"), py::arg("M"), py::arg("k"));
  m.def(
      "oracle",
      [](const Dictionary& d, const std::string& truth, std::size_t k, std::size_t resolution) {
        const Population pop(d, measure_for(d, resolution));
        const Target target(pop, TruthSpec::parse(truth));
        const OracleSolution s = oracle_best(target, k);
        py::dict out;
        out["coefficients"] = s.coefficients;
        out["support"] = s.support;
        out["residual2"] = s.residual2;
        out["exact"] = s.exact;
        return out;
      },
      py::arg("dictionary"), py::arg("truth"), py::arg("k"), py::arg("resolution") = 4096,
      "Best k-term approximation of a truth given in the CLI truth grammar.");
  m.def(
      "membership",
      [](double dist2, std::size_t m_lambda, double rho, double r, double C_f, double C_f_prime) {
        const MembershipFlags f = membership(dist2, m_lambda, rho, r, C_f, C_f_prime);
        py::dict out;
        out["lambda"] = f.in_lambda;
        out["lambda_prime"] = f.in_lambda_prime;
        out["lambda1"] = f.in_lambda1;
        out["lambda2"] = f.in_lambda2;
        return out;
      },
      py::arg("dist2"), py::arg("m_lambda"), py::arg("rho"), py::arg("r"), py::arg("C_f") = 1.0,
      py::arg("C_f_prime") = 1.0);
  m.def(
      "theorem_rhs",
      [](const std::string& kind, double r, std::size_t m_lambda, double kappa_value, double dist2, double constant) {
        BoundConstants c;
        c.B1 = c.B2 = c.C = c.C_prime = constant;
        return theorem_rhs(parse_theorem_kind(kind), c, r, m_lambda, kappa_value, dist2);
      },
      py::arg("kind"), py::arg("r"), py::arg("m_lambda"), py::arg("kappa") = 1.0, py::arg("dist2") = 0.0,
      py::arg("constant") = 1.0);
  m.def("bernstein_bound", &bernstein_bound, py::arg("n"), py::arg("epsilon"), py::arg("w2"), py::arg("d"));
  m.def(
      "lemma_bound",
      [](const std::string& which, const std::map<std::string, double>& params) {
        std::vector<std::pair<std::string, std::string>> kv;
        for (const auto& [k, v] : params) kv.emplace_back(k, io::format_double(v));
        return lemma_bound(parse_lemma(which), LemmaParams::from_key_values(kv));
      },
      py::arg("which"), py::arg("params"), "Tail bound L4, L5, L6, L7 or L9 from a parameter mapping.");

  m.def(
      "generate",
      [](const std::string& truth, std::size_t n, std::uint64_t seed, const std::string& noise) {
        const Sample s = generate(TruthSpec::parse(truth), MeasureSpec::uniform(), NoiseModel::parse(noise), n, seed);
        return py::make_tuple(s.x, s.y);
      },
      py::arg("truth"), py::arg("n"), py::arg("seed"), py::arg("noise") = "uniform:1",
      "Simulated sample on [0, 1]: (X of shape (n, 1), Y).");
  m.def(
      "run_experiment",
      [](const std::string& config_text, std::size_t threads) {
        ExperimentConfig c = ExperimentConfig::parse(config_text);
        c.validate();
        std::vector<ExperimentRow> rows;
        {
          py::gil_scoped_release release;
          rows = run(c, {.threads = threads});
        }
        return rows_csv(rows);
      },
      py::arg("config"), py::arg("threads") = 0, "Runs an experiment config and returns the rows CSV text.");
}
