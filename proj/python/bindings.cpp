#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "altbm/errors.hpp"
#include "altbm/estimation.hpp"
#include "altbm/exp_alternating.hpp"
#include "altbm/flipflop.hpp"
#include "altbm/map_alternating.hpp"

namespace py = pybind11;
using namespace altbm;

namespace {

using Rows = std::vector<std::vector<double>>;

Matrix to_matrix(const Rows& rows) {
  if (rows.empty()) throw InvalidArgument("matrix has no rows");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw InvalidArgument("matrix rows differ in length");
    for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = rows[i][k];
  }
  return m;
}

Rows to_rows(const Matrix& m) {
  Rows out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

DriverStart parse_start(const std::string& s) {
  if (s == "synchronized") return DriverStart::Synchronized;
  if (s == "desynchronized") return DriverStart::Desynchronized;
  throw InvalidArgument("start must be 'synchronized' or 'desynchronized'");
}

MapParams make_map(const std::vector<double>& b, const Rows& c, const Rows& d) {
  return validate_map({b, to_matrix(c), to_matrix(d)});
}

py::dict generator_dict(const GeneratorMatrix& g) {
  py::dict out;
  out["states"] = g.states;
  out["matrix"] = to_rows(g.q);
  return out;
}

std::vector<double> copy(std::span<const double> s) { return {s.begin(), s.end()}; }

py::dict path_dict(const BivariateFlipFlopPath& p, const CoupledPair& c) {
  py::dict out;
  out["lambda"] = p.lambda;
  out["t"] = copy(p.fluid1.breakpoints());
  out["F1"] = copy(p.fluid1.levels());
  out["F2"] = copy(p.fluid2.levels());
  out["chi"] = p.chi;
  out["signs"] = p.signs;
  out["bstar"] = p.bstar;
  out["theta"] = c.skeleton.epochs;
  out["C"] = c.skeleton.values;
  out["M"] = c.skeleton.minima;
  const auto r = coupling_diagnostics(c);
  out["misalignment"] = r.misalignment;
  out["value_residual"] = r.value_residual;
  return out;
}

py::dict estimate_dict(const McEstimate& e) {
  py::dict out;
  out["mean"] = e.mean;
  out["stderr"] = e.std_error;
  out["replications"] = e.replications;
  return out;
}

}  // namespace

PYBIND11_MODULE(_altbm, m) {
  m.doc() = "Flip-flop constructions of alternating Brownian motions";

  static py::exception<InvalidArgument> invalid(m, "InvalidArgument", PyExc_ValueError);
  static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(invalid.ptr(), (e.kind() + ": " + e.what()).c_str());
    } catch (const NumericalError& e) {
      PyErr_SetString(numerical.ptr(), (e.kind() + ": " + e.what()).c_str());
    }
  });

  m.def("standard_generator", [](double lambda) { return generator_dict(build_standard_generator(lambda)); },
        py::arg("lam"));
  m.def("exp_alt_generator",
        [](double lambda, double alpha, double beta) {
          return generator_dict(build_exp_alt_generator(lambda, ExpAltParams(alpha, beta)));
        },
        py::arg("lam"), py::arg("alpha"), py::arg("beta"));
  m.def("map_alt_generator",
        [](double lambda, const std::vector<double>& b, const Rows& c, const Rows& d) {
          return generator_dict(build_map_alt_generator(lambda, make_map(b, c, d)));
        },
        py::arg("lam"), py::arg("b"), py::arg("C"), py::arg("D"));

  m.def("corr_exp",
        [](double alpha, double beta, double t, const std::string& start) {
          return corr_exp(ExpAltParams(alpha, beta, parse_start(start)), t);
        },
        py::arg("alpha"), py::arg("beta"), py::arg("t"), py::arg("start") = "synchronized");
  m.def("cov_laplace",
        [](const std::vector<double>& b, const Rows& c, const Rows& d, double q) {
          return cov_laplace(make_map(b, c, d), q);
        },
        py::arg("b"), py::arg("C"), py::arg("D"), py::arg("q"));
  m.def("cov_map",
        [](const std::vector<double>& b, const Rows& c, const Rows& d, double t, int terms, double tol) {
          return cov_time_domain(make_map(b, c, d), t, terms, tol);
        },
        py::arg("b"), py::arg("C"), py::arg("D"), py::arg("t"), py::arg("terms") = kDefaultInversionTerms,
        py::arg("tolerance") = kDefaultInversionTolerance);
  m.def("corr_map",
        [](const std::vector<double>& b, const Rows& c, const Rows& d, double t, int terms, double tol) {
          return corr_map(make_map(b, c, d), t, terms, tol);
        },
        py::arg("b"), py::arg("C"), py::arg("D"), py::arg("t"), py::arg("terms") = kDefaultInversionTerms,
        py::arg("tolerance") = kDefaultInversionTolerance);

  m.def("simulate_exp_alternating",
        [](double alpha, double beta, const std::vector<double>& lambdas, double horizon, std::uint64_t seed,
           const std::string& start) {
          const auto r = simulate_exp_alternating(ExpAltParams(alpha, beta, parse_start(start)), lambdas, 0,
                                                  horizon, RandomStream(seed));
          auto d = path_dict(r.path, r.coupled);
          d["driver"] = r.driver;
          return d;
        },
        py::arg("alpha"), py::arg("beta"), py::arg("lambdas"), py::arg("horizon"), py::arg("seed") = 1,
        py::arg("start") = "synchronized");
  m.def("simulate_map_alternating",
        [](const std::vector<double>& b, const Rows& c, const Rows& d, const std::vector<double>& lambdas,
           double horizon, std::uint64_t seed, double gamma) {
          const auto r = simulate_map_alternating(make_map(b, c, d), gamma, lambdas, 0, horizon, RandomStream(seed));
          auto out = path_dict(r.path, r.coupled);
          out["states"] = r.driver.states;
          out["counts"] = r.driver.counts;
          return out;
        },
        py::arg("b"), py::arg("C"), py::arg("D"), py::arg("lambdas"), py::arg("horizon"), py::arg("seed") = 1,
        py::arg("gamma") = 0.0);

  m.def("mc_correlation_exp",
        [](double alpha, double beta, double t, std::size_t reps, std::uint64_t seed, const std::string& start,
           std::size_t workers) {
          const Driver d(ExpAltParams(alpha, beta, parse_start(start)));
          McEstimate e;
          {
            py::gil_scoped_release release;
            e = mc_correlation(d, t, reps, RandomStream(seed), workers);
          }
          return estimate_dict(e);
        },
        py::arg("alpha"), py::arg("beta"), py::arg("t"), py::arg("replications") = 10000, py::arg("seed") = 1,
        py::arg("start") = "synchronized", py::arg("workers") = 1);
  m.def("mc_correlation_map",
        [](const std::vector<double>& b, const Rows& c, const Rows& d, double t, std::size_t reps,
           std::uint64_t seed, std::size_t workers) {
          const auto map = make_map(b, c, d);
          McEstimate e;
          {
            py::gil_scoped_release release;
            e = mc_correlation(Driver(map), t, reps, RandomStream(seed), workers);
          }
          return estimate_dict(e);
        },
        py::arg("b"), py::arg("C"), py::arg("D"), py::arg("t"), py::arg("replications") = 10000,
        py::arg("seed") = 1, py::arg("workers") = 1);

  m.def("convergence_sweep",
        [](const std::vector<double>& lambdas, double horizon, std::size_t reps, std::uint64_t seed,
           std::optional<std::pair<double, double>> exp_alt, std::size_t workers) {
          SweepSpec spec;
          spec.lambdas = lambdas;
          spec.horizon = horizon;
          spec.replications = reps;
          if (exp_alt) {
            spec.construction = Construction::ExpAlternating;
            spec.exp_params = ExpAltParams(exp_alt->first, exp_alt->second);
          }
          SweepResult r;
          {
            py::gil_scoped_release release;
            r = convergence_sweep(spec, RandomStream(seed), workers);
          }
          py::list rows;
          for (const auto& row : r.rows) {
            py::dict d;
            d["lambda"] = row.lambda;
            d["median_misalignment"] = row.median_misalignment;
            d["p90_misalignment"] = row.p90_misalignment;
            d["value_residual"] = row.value_residual;
            rows.append(d);
          }
          py::dict out;
          out["rows"] = rows;
          out["slope"] = r.slope;
          out["slope_stderr"] = r.slope_stderr;
          return out;
        },
        py::arg("lambdas"), py::arg("horizon") = 1.0, py::arg("replications") = 100, py::arg("seed") = 1,
        py::arg("exp_alt") = py::none(), py::arg("workers") = 1);
}
