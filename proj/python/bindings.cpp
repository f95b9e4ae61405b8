#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gram_spectra/bounds.hpp"
#include "gram_spectra/ensembles.hpp"
#include "gram_spectra/errors.hpp"
#include "gram_spectra/gramsolve.hpp"
#include "gram_spectra/linalg.hpp"
#include "gram_spectra/mc.hpp"
#include "gram_spectra/ridge.hpp"

namespace py = pybind11;
namespace gs = gram_spectra;
namespace ens = gram_spectra::ensembles;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

gs::DenseMatrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw gs::ValidationError("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return gs::DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

gs::Vector to_vector(const Array& a) {
  if (a.ndim() != 1) throw gs::ValidationError("expected a 1-d array");
  return gs::Vector(a.data(), a.data() + a.shape(0));
}

py::array_t<double> to_array(const gs::Vector& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

ens::DesignSpec design(std::size_t n, std::size_t p, const std::string& cov, const std::string& law) {
  return ens::DesignSpec{n, p, ens::CovarianceModel::parse(cov, p), ens::parse_entry_law(law)};
}

py::dict trace_dict(const gs::gramsolve::GdTrace& t) {
  py::dict d;
  d["t_epsilon"] = t.t_epsilon;
  d["censored"] = t.censored;
  d["iterations"] = t.iterations;
  d["gaps"] = to_array(t.gaps);
  d["theta"] = to_array(t.theta);
  return d;
}

gs::gramsolve::GdTrace solve(bool cg, const Array& s, const Array& b, const Array& theta0, double epsilon,
                             std::int64_t max_iter) {
  const auto system = gs::gramsolve::system_from_matrix(to_matrix(s), to_vector(b));
  gs::gramsolve::SolveOptions opt;
  opt.epsilon = epsilon;
  opt.max_iter = max_iter;
  const gs::Vector start = to_vector(theta0);
  return cg ? gs::gramsolve::cg_solve(system, start, opt) : gs::gramsolve::gd_solve(system, start, opt);
}

}  // namespace

PYBIND11_MODULE(_gram_spectra, m) {
  m.doc() = "Extreme singular values and condition numbers of Gaussian random matrices";
  m.attr("__version__") = "1.0.0";

  m.def("singular_values", [](const Array& a) { return to_array(gs::linalg::singular_values(to_matrix(a))); },
        py::arg("a"), "Singular values in non-increasing order.");

  m.def(
      "spectral_summary",
      [](const Array& a) {
        const auto s = gs::linalg::spectral_summary(to_matrix(a));
        py::dict d;
        d["s_max"] = s.s_max;
        d["s_min"] = s.s_min;
        d["kappa"] = s.kappa;
        return d;
      },
      py::arg("a"));

  m.def(
      "bound",
      [](const std::string& name, std::size_t n, std::size_t p, double r) {
        if (name == "min_sv_negative_moment") return to_python(gs::bounds::min_sv_negative_moment_bound(n, p, r).to_json());
        if (name == "min_sv_normalized_moment") {
          return to_python(gs::bounds::min_sv_normalized_moment_bound(n, p, r).to_json());
        }
        if (name == "max_sv_moment") return to_python(gs::bounds::max_sv_moment_bound(n, p, r).to_json());
        throw gs::ValidationError("unknown bound '" + name + "'");
      },
      py::arg("name"), py::arg("n"), py::arg("p"), py::arg("r"),
      "Moment bound report as a dict: value, constants, valid.");

  m.def("expected_log_kappa_bound", &gs::bounds::expected_log_kappa_bound, py::arg("n"), py::arg("p"));

  m.def(
      "estimate_moment",
      [](std::size_t n, std::size_t p, const std::string& statistic, double r, std::size_t trials, std::uint64_t seed,
         unsigned workers, const std::string& cov, const std::string& law) {
        const auto est = gs::mc::estimate_moment(design(n, p, cov, law), gs::mc::parse_statistic(statistic), r,
                                                 trials, seed, workers);
        return to_python(est.to_json());
      },
      py::arg("n"), py::arg("p"), py::arg("statistic") = "kappa", py::arg("r") = 1.0, py::arg("trials") = 1000,
      py::arg("seed") = gs::rng::kDefaultSeed, py::arg("workers") = 1, py::arg("cov") = "identity",
      py::arg("law") = "gaussian");

  m.def(
      "sweep_gamma",
      [](std::size_t n, const std::vector<double>& grid, const std::string& statistic, double r, std::size_t trials,
         std::uint64_t seed, unsigned workers) {
        const auto rows =
            gs::mc::sweep_gamma(n, grid, gs::mc::parse_statistic(statistic), r, trials, seed, workers);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& row : rows) {
          nlohmann::json j = row.estimate.to_json();
          j["n"] = row.n;
          j["p"] = row.p;
          j["gamma"] = row.gamma;
          out.push_back(j);
        }
        return to_python(out);
      },
      py::arg("n"), py::arg("gamma_grid"), py::arg("statistic") = "kappa", py::arg("r") = 1.0,
      py::arg("trials") = 200, py::arg("seed") = gs::rng::kDefaultSeed, py::arg("workers") = 1);

  m.def(
      "inv_chisq_check",
      [](std::size_t n, std::size_t p, std::size_t trials, std::uint64_t seed) {
        const auto ks = gs::mc::inv_chisq_check(n, p, trials, seed, 1);
        py::dict d;
        d["ks_statistic"] = ks.ks_statistic;
        d["critical_value_1pct"] = ks.critical_value_1pct;
        d["dof"] = ks.dof;
        d["passes"] = ks.passes();
        return d;
      },
      py::arg("n"), py::arg("p"), py::arg("trials") = 2000, py::arg("seed") = gs::rng::kDefaultSeed);

  m.def(
      "exact_ridge_risk",
      [](const Array& x, const Array& b, double lambda, bool noise) {
        gs::ridge::RidgeProblem pr;
        pr.x = to_matrix(x);
        pr.b = to_matrix(b);
        if (noise) pr.noise = ens::CovarianceModel::identity(pr.b.cols());
        pr.lambda = lambda;
        const auto rep = gs::ridge::exact_conditional_risk(pr);
        py::dict d;
        d["bias"] = rep.bias_term;
        d["variance"] = rep.variance_term;
        d["total"] = rep.total;
        d["bias_upper"] = rep.bias_upper;
        d["variance_upper"] = rep.variance_upper;
        return d;
      },
      py::arg("x"), py::arg("b"), py::arg("lam"), py::arg("noise") = true,
      "Conditional ridge risk for a fixed design with identity noise covariance.");

  m.def(
      "gd_solve",
      [](const Array& s, const Array& b, const Array& theta0, double epsilon, std::int64_t max_iter) {
        return trace_dict(solve(false, s, b, theta0, epsilon, max_iter));
      },
      py::arg("s"), py::arg("b"), py::arg("theta0"), py::arg("epsilon") = 1e-6, py::arg("max_iter") = 100000);

  m.def(
      "cg_solve",
      [](const Array& s, const Array& b, const Array& theta0, double epsilon, std::int64_t max_iter) {
        return trace_dict(solve(true, s, b, theta0, epsilon, max_iter));
      },
      py::arg("s"), py::arg("b"), py::arg("theta0"), py::arg("epsilon") = 1e-6, py::arg("max_iter") = 100000);
}
