#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lindley/cli.hpp"
#include "lindley/cusum.hpp"
#include "lindley/density.hpp"
#include "lindley/fet.hpp"
#include "lindley/oracle.hpp"

namespace py = pybind11;
using namespace lindley;

namespace {

ProcessConfig make_config(double mu, double sigma, double x, std::optional<double> h) {
    ProcessConfig cfg{{mu, sigma}, x, h};
    if (h) {
        cfg.validate_fet();
    } else {
        cfg.validate();
    }
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exact laws of the Lindley process with Laplace increments";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<RegimeError>(m, "RegimeError", PyExc_ValueError);
    py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

    py::class_<MixedDensity>(m, "MixedDensity")
        .def_readonly("n", &MixedDensity::n)
        .def_readonly("atom", &MixedDensity::atom)
        .def_readonly("atom_location", &MixedDensity::atom_location)
        .def_property_readonly("regime", [](const MixedDensity& d) { return std::string(to_string(d.regime)); })
        .def_property_readonly("knots",
                               [](const MixedDensity& d) {
                                   std::vector<double> k;
                                   for (std::size_t i = 0; i + 1 < d.segments.size(); ++i) k.push_back(d.segments[i].hi);
                                   return k;
                               })
        .def(
            "pdf", [](const MixedDensity& d, double u) { return evaluate_mixed_density(d, u); },
            "Continuous part at u > 0 (0 at u = 0).")
        .def("pdf", [](const MixedDensity& d, const std::vector<double>& us) {
            std::vector<double> out;
            out.reserve(us.size());
            for (double u : us) out.push_back(evaluate_mixed_density(d, u));
            return out;
        })
        .def("cdf", [](const MixedDensity& d, double u) { return cdf(d, u); })
        .def("total_mass", [](const MixedDensity& d) { return total_mass(d); })
        .def("moment", [](const MixedDensity& d, int order) { return moments(d, order); }, py::arg("order"))
        .def("variance", [](const MixedDensity& d) { return variance(d); })
        .def("__repr__", [](const MixedDensity& d) {
            std::ostringstream os;
            os << "<MixedDensity n=" << d.n << " atom=" << d.atom << " segments=" << d.segments.size() << ">";
            return os.str();
        });

    m.def(
        "density",
        [](double mu, double sigma, double x, int n, int max_n) {
            return density_at(make_config(mu, sigma, x, std::nullopt), n, max_n);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("x"), py::arg("n"), py::arg("max_n") = kDefaultMaxPositionSteps,
        "Law of W_n started at x.");
    m.def(
        "density_chain",
        [](double mu, double sigma, double x, int n_max, int max_n) {
            return density_chain(make_config(mu, sigma, x, std::nullopt), n_max, max_n);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("x"), py::arg("n_max"), py::arg("max_n") = kDefaultMaxPositionSteps);
    m.def(
        "position_regime",
        [](double mu, double sigma, double x) {
            return std::string(to_string(dispatch_position_regime(make_config(mu, sigma, x, std::nullopt))));
        },
        py::arg("mu"), py::arg("sigma"), py::arg("x"));

    m.def(
        "fet_pmf",
        [](double mu, double sigma, double x, double h, int n_max) {
            const auto cfg = make_config(mu, sigma, x, h);
            const auto dist = fet_distribution(cfg, n_max);
            std::vector<double> out;
            for (const auto& p : dist.pieces_by_n) out.push_back(p(x));
            return out;
        },
        py::arg("mu"), py::arg("sigma"), py::arg("x"), py::arg("h"), py::arg("n_max"),
        "P(n | x) for n = 1..n_max.");
    m.def(
        "fet_cdf",
        [](double mu, double sigma, double x, double h, int n_max) {
            return fet_cdf(make_config(mu, sigma, x, h), n_max);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("x"), py::arg("h"), py::arg("n_max"));
    m.def(
        "mean_fet",
        [](double mu, double sigma, double x, double h, double rel_tol) {
            const auto r = mean_fet(make_config(mu, sigma, x, h), rel_tol);
            py::dict d;
            d["mean"] = r.mean;
            d["tail_bound"] = r.tail_bound;
            d["terms"] = r.terms;
            d["tail_ratio"] = r.tail_ratio;
            return d;
        },
        py::arg("mu"), py::arg("sigma"), py::arg("x"), py::arg("h"), py::arg("rel_tol") = 1e-10);
    m.def(
        "fet_regime",
        [](double mu, double sigma, double x, double h) {
            return std::string(to_string(dispatch_fet_regime(make_config(mu, sigma, x, h))));
        },
        py::arg("mu"), py::arg("sigma"), py::arg("x"), py::arg("h"));

    m.def(
        "log_mgf", [](double mu, double sigma, double theta) { return cusum::log_mgf({{mu, sigma}, theta, 1.0}); },
        py::arg("mu"), py::arg("sigma"), py::arg("theta"));
    m.def(
        "llr_params",
        [](double mu, double sigma, double theta) {
            const auto p = cusum::llr_params({{mu, sigma}, theta, 1.0});
            return py::make_tuple(p.mu, p.sigma);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("theta"), "Location and scale of the log-likelihood ratio.");
    m.def(
        "run_length_pmf",
        [](double mu, double sigma, double theta, double h, double x0, int n_max) {
            return cusum::run_length_distribution({{mu, sigma}, theta, h}, x0, n_max);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("theta"), py::arg("h"), py::arg("x0"), py::arg("n_max"));
    m.def(
        "average_run_length",
        [](double mu, double sigma, double theta, double h, double x0) {
            return cusum::average_run_length({{mu, sigma}, theta, h}, x0);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("theta"), py::arg("h"), py::arg("x0"));

    m.def(
        "simulate",
        [](double mu, double sigma, double x, std::optional<double> h, std::int64_t trajectories, std::uint64_t seed,
           int n_max, int threads) {
            oracle::McConfig mc;
            mc.trajectories = trajectories;
            mc.seed = seed;
            mc.n_max = n_max;
            oracle::McResult r;
            {
                py::gil_scoped_release release;
                r = oracle::simulate(make_config(mu, sigma, x, h), mc, threads);
            }
            py::dict d;
            d["atom_frequency"] = r.atom_freq_by_n;
            d["atom_standard_error"] = r.atom_se_by_n;
            d["mean"] = r.mean_by_n;
            d["fet_counts"] = r.fet_counts;
            d["fet_censored"] = r.fet_censored;
            d["fet_mean"] = r.fet_mean;
            return d;
        },
        py::arg("mu"), py::arg("sigma"), py::arg("x"), py::arg("h") = py::none(), py::arg("trajectories") = 100000,
        py::arg("seed") = 42, py::arg("n_max") = 10, py::arg("threads") = 0,
        "Monte Carlo of the recursion; exit times are recorded when h is given.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line tool in process; returns (exit code, stdout, stderr).");
}
