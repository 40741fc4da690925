#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "cli.hpp"
#include "schlab/model.hpp"
#include "schlab/parallel.hpp"
#include "schlab/sde.hpp"
#include "schlab/shape.hpp"
#include "schlab/stats.hpp"
#include "schlab/transfer.hpp"
#include "schlab/tridiag.hpp"

namespace py = pybind11;
using namespace schlab;

namespace {

TridiagModel to_model(const std::vector<double>& diag) { return model_from_diagonal(diag); }

py::dict pair_dict(const SpectralPair& p) {
  py::dict d;
  d["mu"] = p.mu;
  d["psi"] = p.psi;
  d["index"] = p.index;
  d["residual"] = p.residual;
  d["method"] = p.method == EigenvectorMethod::transfer_recursion ? "transfer_recursion"
                                                                  : "inverse_iteration";
  return d;
}

py::dict summary_dict(const EmpiricalSummary& s) {
  py::dict d;
  d["sample_count"] = s.sample_count;
  d["mean"] = s.mean;
  d["variance"] = s.variance;
  d["ci_halfwidth"] = s.ci_halfwidth;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Critical one-dimensional random Schroedinger operator: finite-n spectra and limits";
  m.attr("__version__") = SCHLAB_VERSION;

  m.def("rho", &rho, py::arg("E"));
  m.def(
      "energy_context",
      [](double E, double sigma) {
        const auto c = energy_context(E, sigma);
        py::dict d;
        d["E"] = c.E;
        d["sigma"] = c.sigma;
        d["rho"] = c.rho;
        d["tau"] = c.tau;
        return d;
      },
      py::arg("E"), py::arg("sigma"));

  m.def(
      "sample_model",
      [](std::size_t n, double sigma, std::uint64_t seed, std::uint64_t trial, const std::string& noise) {
        ModelParams p{n, sigma, seed};
        p.validate();
        return sample_model(p, NoiseSpec{parse_noise_family(noise)}, trial).diag;
      },
      py::arg("n"), py::arg("sigma") = 1.0, py::arg("seed") = 0, py::arg("trial") = 0,
      py::arg("noise") = "gaussian", "Diagonal of H_n; the off-diagonals are 1.");


  m.def(
      "eigenvalues",
      [](const std::vector<double>& diag, std::optional<double> tol) {
        const auto model = to_model(diag);
        return tol ? eigenvalues(model, *tol) : eigenvalues(model);
      },
      py::arg("diag"), py::arg("tol") = py::none());
  m.def("sturm_count", [](const std::vector<double>& diag, double x) {
    return sturm_count(to_model(diag), x);
  }, py::arg("diag"), py::arg("x"));
  m.def(
      "eigenvector",
      [](const std::vector<double>& diag, double mu, std::uint64_t seed) {
        return pair_dict(eigenvector(to_model(diag), mu, seed));
      },
      py::arg("diag"), py::arg("mu"), py::arg("seed") = 0);
  m.def("eigen_condition", [](const std::vector<double>& diag, double mu) {
    return eigen_condition(to_model(diag), mu);
  }, py::arg("diag"), py::arg("mu"));
  m.def(
      "shape_measure",
      [](const std::vector<double>& psi, std::size_t bins) {
        SpectralPair p;
        p.psi = psi;
        return shape_measure(p, bins).bins;
      },
      py::arg("psi"), py::arg("bins") = kDefaultShapeBins);
  m.def(
      "peak",
      [](const std::vector<double>& bins, std::size_t window) {
        return peak(ShapeMeasure{bins}, window);
      },
      py::arg("bins"), py::arg("window"));
  m.def(
      "decay_slope",
      [](const std::vector<double>& bins, double peak_location, double min_distance) {
        return fit_decay_slope(log_profile(ShapeMeasure{bins}, peak_location), min_distance);
      },
      py::arg("bins"), py::arg("peak"), py::arg("min_distance") = 0.0);
  m.def(
      "sample_limit_shape",
      [](double tau, std::uint64_t seed, std::uint64_t trial, std::size_t bins) {
        Rng rng = Rng::stream(seed, StreamTag::limit_shape, trial);
        const auto s = sample_limit_shape(tau, rng, bins);
        py::dict d;
        d["peak"] = s.peak;
        d["bins"] = s.measure.bins;
        return d;
      },
      py::arg("tau"), py::arg("seed") = 0, py::arg("trial") = 0, py::arg("bins") = kDefaultShapeBins);

  m.def(
      "arcsine_cdf", [](double E) { return arcsine_cdf_clamped(E); }, py::arg("E"));
  m.def(
      "ks_two_sample",
      [](const std::vector<double>& a, const std::vector<double>& b) { return ks_two_sample(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "dos",
      [](std::size_t n, double sigma, std::size_t trials, std::uint64_t seed, const std::string& noise,
         int threads) {
        DosResult r;
        {
          py::gil_scoped_release release;
          r = dos_check(ModelParams{n, sigma, seed}, NoiseSpec{parse_noise_family(noise)}, trials,
                        resolve_threads(threads));
        }
        py::dict d = summary_dict(r.summary);
        d["ks"] = r.summary.ks_vs_reference;
        d["eigenvalues"] = r.pooled;
        return d;
      },
      py::arg("n"), py::arg("sigma") = 1.0, py::arg("trials") = 1, py::arg("seed") = 0,
      py::arg("noise") = "gaussian", py::arg("threads") = 1);

  m.def(
      "sample_sch_star",
      [](double tau, double lo, double hi, std::uint64_t seed, std::uint64_t trial, std::size_t steps) {
        SchOptions opts;
        opts.profile_points = 0;
        return sample_sch_star(tau, lo, hi, seed, trial, steps, opts).roots;
      },
      py::arg("tau"), py::arg("lo"), py::arg("hi"), py::arg("seed") = 0, py::arg("trial") = 0,
      py::arg("steps") = kDefaultSdeSteps, "Points of Sch*_tau in [lo, hi).");
  m.def(
      "intensity_check",
      [](double tau, double lo, double hi, const std::string& functional, std::size_t trials,
         std::uint64_t seed, std::size_t steps, int threads) {
        IntensityResult r;
        {
          py::gil_scoped_release release;
          r = intensity_check(tau, lo, hi, parse_test_functional(functional), trials, seed, steps,
                              resolve_threads(threads));
        }
        py::dict d;
        d["lhs"] = r.lhs;
        d["rhs"] = r.rhs;
        d["stderr"] = r.stderr_combined;
        d["mean_root_count"] = r.mean_root_count;
        d["root_count_stderr"] = r.root_count_stderr;
        return d;
      },
      py::arg("tau"), py::arg("lo"), py::arg("hi"), py::arg("functional") = "unit",
      py::arg("trials") = 1000, py::arg("seed") = 0, py::arg("steps") = kDefaultSdeSteps,
      py::arg("threads") = 1);
  m.def(
      "gap_statistics",
      [](std::size_t n, double sigma, double E, std::size_t trials, std::size_t limit_trials,
         std::uint64_t seed, std::size_t steps, int threads) {
        GapOptions o;
        o.E = E;
        o.trials = trials;
        o.limit_trials = limit_trials;
        o.sde_steps = steps;
        o.threads = resolve_threads(threads);
        GapComparison g;
        {
          py::gil_scoped_release release;
          g = gap_statistics(ModelParams{n, sigma, seed}, NoiseSpec{}, o);
        }
        py::dict d;
        d["tau"] = g.tau;
        d["degenerate"] = g.degenerate;
        d["finite_gaps"] = g.finite_gaps;
        d["limit_gaps"] = g.limit_gaps;
        d["gap_ks"] = g.gap_ks;
        d["gap_ks_critical"] = g.gap_ks_critical;
        d["mass_ks"] = g.mass_ks;
        d["head_ks"] = g.head_ks;
        return d;
      },
      py::arg("n"), py::arg("sigma") = 1.0, py::arg("E") = 0.5, py::arg("trials") = 200,
      py::arg("limit_trials") = 200, py::arg("seed") = 0, py::arg("steps") = kDefaultSdeSteps,
      py::arg("threads") = 1);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"schlab"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
