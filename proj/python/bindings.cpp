#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "rmtk/ensembles.hpp"
#include "rmtk/harness.hpp"
#include "rmtk/io.hpp"
#include "rmtk/rank_one.hpp"
#include "rmtk/special.hpp"
#include "rmtk/stats.hpp"
#include "rmtk/theory.hpp"

namespace py = pybind11;
using namespace rmtk;

namespace {

ensembles::EnsembleParams make_params(int n, int beta, double sigma, std::uint64_t seed) {
    ensembles::EnsembleParams p{n, beta, sigma, 0.0, seed};
    p.validate();
    return p;
}

theory::ModelParams make_model(int n, double sigma) { return {n, sigma}; }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gaussian ensembles with a rank-one channel coupling: sampling, "
              "secular-equation eigen-updates, and closed-form width statistics";

    // translators run newest-first: register the base before the derived
    py::register_exception<Error>(m, "RmtkError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    m.def(
        "sample_spectrum",
        [](int n, int beta, double sigma, std::uint64_t seed, bool fast) {
            const auto p = make_params(n, beta, sigma, seed);
            const auto s = fast ? ensembles::fast_sample_spectrum(p)
                                : ensembles::extract_spectrum(
                                      ensembles::dense_eigh(ensembles::sample_gaussian(p)));
            return py::make_tuple(s.energies, s.weights);
        },
        py::arg("n"), py::arg("beta") = 1, py::arg("sigma") = 1.0, py::arg("seed") = 1,
        py::arg("fast") = false,
        "Sample (eigenvalues, first-component weights) of an unperturbed ensemble matrix.");

    m.def(
        "secular_solve",
        [](const Eigen::VectorXd& e, const Eigen::VectorXd& r, double coupling) {
            return rank_one::secular_solve(e, r, coupling);
        },
        py::arg("e"), py::arg("r"), py::arg("coupling"),
        "Perturbed eigenvalues of the rank-one update from (e, r) without rediagonalization.");

    m.def(
        "perturbed_weights",
        [](const Eigen::VectorXd& e, const Eigen::VectorXd& E, double coupling) {
            return rank_one::perturbed_weights(e, E, coupling);
        },
        py::arg("e"), py::arg("E"), py::arg("coupling"));

    m.def(
        "perturb",
        [](const Eigen::VectorXd& e, const Eigen::VectorXd& r, double coupling) {
            ensembles::Spectrum s;
            s.energies = e;
            s.weights = r;
            const auto out = rank_one::perturb(s, coupling);
            return py::make_tuple(out.energies, out.weights);
        },
        py::arg("e"), py::arg("r"), py::arg("coupling"),
        "Full (e, r) -> (E, z) secular update; coupling 0 is the identity.");

    m.def(
        "overlap_coefficients",
        [](const Eigen::VectorXd& e, const Eigen::VectorXd& E) {
            const auto od = rank_one::overlap_coefficients(e, E);
            return py::make_tuple(od.a_sq, od.b_sq);
        },
        py::arg("e"), py::arg("E"));

    m.def(
        "overlap_matrix",
        [](const Eigen::VectorXd& e, const Eigen::VectorXd& E) {
            return rank_one::overlap_matrix(e, E, rank_one::overlap_coefficients(e, E));
        },
        py::arg("e"), py::arg("E"));

    m.def(
        "trace_identities",
        [](const Eigen::VectorXd& e, const Eigen::VectorXd& E, const Eigen::VectorXd& z,
           double coupling) {
            const auto res = rank_one::trace_identities(e, E, z, coupling);
            return py::make_tuple(res.linear, res.quadratic);
        },
        py::arg("e"), py::arg("E"), py::arg("z"), py::arg("coupling"));

    // closed-form predictions
    m.def(
        "wigner_density",
        [](double energy, int n, double sigma) {
            return theory::wigner_density(energy, make_model(n, sigma));
        },
        py::arg("energy"), py::arg("n"), py::arg("sigma") = 1.0);
    m.def(
        "wigner_count",
        [](double energy, int n, double sigma) {
            return theory::wigner_count(energy, make_model(n, sigma));
        },
        py::arg("energy"), py::arg("n"), py::arg("sigma") = 1.0);
    m.def(
        "l_of_energy",
        [](double energy, double kappa, int n, double sigma) {
            return theory::l_of_energy(energy, kappa, make_model(n, sigma));
        },
        py::arg("energy"), py::arg("kappa"), py::arg("n"), py::arg("sigma") = 1.0,
        "Energy-dependent mean of x = N |Psi_1|^2.");
    m.def(
        "collective_state",
        [](double kappa, int n, double sigma) {
            const auto c = theory::collective_state(kappa, make_model(n, sigma));
            return py::make_tuple(c.energy, c.weight, c.half_width);
        },
        py::arg("kappa"), py::arg("n"), py::arg("sigma") = 1.0,
        "(energy, weight, half_width) of the separated state; requires kappa^2 > 1.");
    m.def(
        "bulk_density",
        [](double energy, double kappa, int n, double sigma) {
            return theory::bulk_density_energy(energy, kappa, make_model(n, sigma));
        },
        py::arg("energy"), py::arg("kappa"), py::arg("n"), py::arg("sigma") = 1.0);
    m.def("modified_pt_pdf", &theory::modified_pt_pdf, py::arg("x"), py::arg("l"), py::arg("beta"));
    m.def("modified_pt_cdf", &theory::modified_pt_cdf, py::arg("x"), py::arg("l"), py::arg("beta"));
    m.def(
        "lagrange_mu",
        [](double kappa, int beta, int n, py::object z_c) {
            if (z_c.is_none()) return theory::lagrange_mu(kappa, beta, n);
            return theory::lagrange_mu(kappa, beta, n, z_c.cast<double>());
        },
        py::arg("kappa"), py::arg("beta"), py::arg("n"), py::arg("z_c") = py::none());
    m.def(
        "window_moment",
        [](double q, double e1, double e2, double kappa, int beta, int n, double sigma) {
            return theory::window_moment(q, e1, e2, kappa, beta, make_model(n, sigma));
        },
        py::arg("q"), py::arg("e1"), py::arg("e2"), py::arg("kappa"), py::arg("beta"),
        py::arg("n"), py::arg("sigma") = 1.0);
    m.def(
        "window_pdf",
        [](double x, double e1, double e2, double kappa, int beta, int n, double sigma) {
            return theory::window_pdf(x, e1, e2, kappa, beta, make_model(n, sigma));
        },
        py::arg("x"), py::arg("e1"), py::arg("e2"), py::arg("kappa"), py::arg("beta"),
        py::arg("n"), py::arg("sigma") = 1.0);
    m.def("fullwindow_factor", &theory::fullwindow_factor, py::arg("x"), py::arg("kappa"),
          py::arg("beta"));
    m.def("fullwindow_factor_series", &theory::fullwindow_factor_series, py::arg("x"),
          py::arg("kappa"), py::arg("beta"));
    m.def("bessel_i1", &special::bessel_i1, py::arg("y"));

    // statistics
    m.def(
        "ks_statistic",
        [](const std::vector<double>& values, const std::function<double(double)>& cdf) {
            const auto r = stats::ks_statistic(std::span<const double>(values), cdf);
            return py::make_tuple(r.statistic, r.p_value);
        },
        py::arg("values"), py::arg("cdf"));
    m.def(
        "ks_two_sample",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto r = stats::ks_two_sample(a, b);
            return py::make_tuple(r.statistic, r.p_value);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "gaussian_fit",
        [](const std::vector<double>& values) {
            stats::SampleSet s;
            s.values = values;
            const auto f = stats::gaussian_fit(s);
            return py::make_tuple(f.mean, f.variance);
        },
        py::arg("values"));

    // verification experiments
    m.def("experiment_names", [] { return harness::experiment_names(); });
    m.def(
        "run_experiment",
        [](const std::string& name, const std::string& config_json) {
            const auto cfg_json = nlohmann::json::parse(config_json);
            harness::ExperimentConfig cfg;
            cfg.params = io::params_from_json(cfg_json.value("params", nlohmann::json::object()));
            cfg.realizations = cfg_json.value("realizations", 50);
            cfg.threads = cfg_json.value("threads", 0);
            if (cfg_json.contains("kappa_grid"))
                cfg.kappa_grid = cfg_json["kappa_grid"].get<std::vector<double>>();
            if (cfg_json.contains("experiments") && cfg_json["experiments"].contains(name))
                cfg.extra = cfg_json["experiments"][name];
            if (cfg_json.contains("kappa") && !cfg.extra.contains("kappa"))
                cfg.extra["kappa"] = cfg_json["kappa"];
            const auto rep = harness::run_experiment(name, cfg);
            return rep.to_json().dump();
        },
        py::arg("name"), py::arg("config_json") = "{}",
        "Run a verification experiment; returns the report as a JSON string.");

    m.attr("__version__") = "0.1.0";
}
