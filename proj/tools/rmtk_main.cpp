// rmtk: sampling, closed-form theory curves, and the verification suite for
// Gaussian ensembles with a rank-one channel coupling.
//
// Exit codes: 0 pass, 1 check failure, 2 usage/config error, 3 runtime error.

#include <CLI11.hpp>
#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "rmtk/common.hpp"
#include "rmtk/harness.hpp"
#include "rmtk/io.hpp"
#include "rmtk/quadrature.hpp"
#include "rmtk/rank_one.hpp"
#include "rmtk/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

// invalid invocation or configuration, as opposed to a failure while running
struct ConfigError : rmtk::Error {
    using Error::Error;
};

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "rmtk_out";
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
};

json load_config(const CommonOpts& opts) {
    json cfg = json::object();
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw ConfigError("cannot open config: " + opts.config_path);
        try {
            cfg = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("config parse error in " + opts.config_path + ": " + e.what());
        }
    }
    for (const std::string& ov : opts.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must be key=value: " + ov);
        const std::string key = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;   // plain string
        }
        json* node = &cfg;
        std::size_t pos = 0;
        for (;;) {
            const auto dot = key.find('.', pos);
            const std::string part = key.substr(pos, dot - pos);
            if (part.empty()) throw ConfigError("bad override key: " + key);
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            pos = dot + 1;
        }
    }
    if (opts.seed_set) cfg["params"]["seed"] = opts.seed;
    if (opts.threads >= 0) cfg["threads"] = opts.threads;
    return cfg;
}

rmtk::ensembles::EnsembleParams params_of(const json& cfg) {
    return rmtk::io::params_from_json(cfg.value("params", json::object()));
}

rmtk::harness::ExperimentConfig experiment_config(const json& cfg, const std::string& name) {
    rmtk::harness::ExperimentConfig ec;
    ec.params = params_of(cfg);
    ec.realizations = cfg.value("realizations", 50);
    ec.bins = cfg.value("bins", 0);
    ec.threads = cfg.value("threads", 0);
    if (cfg.contains("kappa_grid")) ec.kappa_grid = cfg["kappa_grid"].get<std::vector<double>>();
    if (cfg.contains("windows"))
        for (const auto& w : cfg["windows"])
            ec.windows.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
    if (cfg.contains("tolerances"))
        for (const auto& [k, v] : cfg["tolerances"].items()) ec.tolerances[k] = v.get<double>();
    if (cfg.contains("experiments") && cfg["experiments"].contains(name))
        ec.extra = cfg["experiments"][name];
    if (cfg.contains("kappa") && !ec.extra.contains("kappa")) ec.extra["kappa"] = cfg["kappa"];
    return ec;
}

int cmd_sample(const CommonOpts& opts) {
    const json cfg = load_config(opts);
    const auto params = params_of(cfg);
    const int realizations = cfg.value("realizations", 1);
    const std::string sampler = cfg.value("sampler", std::string("dense"));
    if (sampler != "dense" && sampler != "fast")
        throw rmtk::Error("sampler must be 'dense' or 'fast'");
    const fs::path out(opts.out_dir);
    fs::create_directories(out);

    json files = json::array();
    for (int i = 0; i < realizations; ++i) {
        auto p = params.with_seed(rmtk::derive_seed(
            params.seed, {static_cast<std::uint64_t>(params.n),
                          static_cast<std::uint64_t>(params.beta),
                          std::bit_cast<std::uint64_t>(params.sigma),
                          static_cast<std::uint64_t>(i)}));
        const double coupling = p.coupling;
        p.coupling = 0.0;
        rmtk::ensembles::Spectrum base;
        if (sampler == "dense")
            base = rmtk::ensembles::extract_spectrum(
                rmtk::ensembles::dense_eigh(rmtk::ensembles::sample_gaussian(p)));
        else
            base = rmtk::ensembles::fast_sample_spectrum(p);
        const auto spec = rmtk::rank_one::perturb(base, coupling);
        char name[64];
        std::snprintf(name, sizeof(name), "spectrum_%04d.csv", i);
        rmtk::io::write_spectrum_csv(out / name, spec, coupling != 0.0);
        files.push_back({{"name", name}, {"hash", rmtk::io::file_hash(out / name)}});
    }
    json manifest = {{"seed", params.seed},
                     {"params", rmtk::io::params_to_json(params)},
                     {"realizations", realizations},
                     {"sampler", sampler},
                     {"files", files}};
    rmtk::io::write_json(out / "manifest.json", manifest);
    std::printf("wrote %d spectra to %s\n", realizations, out.string().c_str());
    return kExitPass;
}

int cmd_theory(const CommonOpts& opts) {
    const json cfg = load_config(opts);
    const std::string formula = cfg.value("formula", std::string());
    static const std::vector<std::string> known = {
        "wigner", "density_correction", "l_of_E", "window_pdf", "F1", "F2", "series"};
    if (std::find(known.begin(), known.end(), formula) == known.end())
        throw rmtk::Error("formula must be one of wigner|density_correction|l_of_E|window_pdf|F1|F2|series");

    json pj = cfg.value("params", json::object());
    rmtk::theory::ModelParams mp{pj.value("n", 1000), pj.value("sigma", 1.0)};
    const double kappa = cfg.value("kappa", 0.0);
    const int beta = cfg.value("beta", 1);

    std::vector<double> grid;
    if (cfg.contains("grid") && cfg["grid"].is_array()) {
        grid = cfg["grid"].get<std::vector<double>>();
    } else {
        const json g = cfg.value("grid", json::object());
        const int points = g.value("points", 201);
        double lo = g.value("lo", -mp.edge());
        double hi = g.value("hi", mp.edge());
        if (formula == "window_pdf" || formula == "F1" || formula == "F2" || formula == "series") {
            lo = g.value("lo", 1e-3);
            hi = g.value("hi", 10.0);
        }
        if (points < 2) throw rmtk::Error("grid.points must be >= 2");
        grid.resize(points);
        for (int i = 0; i < points; ++i)
            grid[i] = lo + (hi - lo) * i / (points - 1.0);
    }

    rmtk::theory::TheoryCurve curve;
    curve.grid = grid;
    curve.formula = formula;
    curve.meta = {{"formula", formula}, {"kappa", kappa}, {"beta", beta},
                  {"n", mp.n}, {"sigma", mp.sigma}};
    std::vector<double> e_window;
    if (cfg.contains("window")) e_window = cfg["window"].get<std::vector<double>>();

    for (double x : grid) {
        double v = 0.0;
        try {
            if (formula == "wigner") v = rmtk::theory::wigner_density(x, mp);
            else if (formula == "density_correction") v = rmtk::theory::bulk_density_energy(x, kappa, mp);
            else if (formula == "l_of_E") v = rmtk::theory::l_of_energy(x, kappa, mp);
            else if (formula == "F1") v = rmtk::theory::fullwindow_factor(x, kappa, 1);
            else if (formula == "F2") v = rmtk::theory::fullwindow_factor(x, kappa, 2);
            else if (formula == "series") v = rmtk::theory::fullwindow_factor_series(x, kappa, beta);
            else {
                if (e_window.size() != 2) throw rmtk::Error("window_pdf requires \"window\": [e1, e2]");
                v = rmtk::theory::window_pdf(x, e_window[0], e_window[1], kappa, beta, mp);
            }
        } catch (const rmtk::DomainError& e) {
            throw rmtk::Error("formula '" + formula + "' failed at grid point " +
                              rmtk::io::format_double(x) + ": " + e.what());
        }
        curve.values.push_back(v);
    }

    if (formula == "window_pdf") {
        // normalization reported in the sidecar
        const auto q = rmtk::quadrature::integrate(
            [&](double x) {
                return rmtk::theory::window_pdf(x, e_window[0], e_window[1], kappa, beta, mp);
            },
            1e-9, 60.0, 1e-8, 1e-9);
        curve.meta["normalization"] = q.value;
        curve.meta["window"] = e_window;
    }

    const fs::path out(opts.out_dir);
    rmtk::io::write_theory_curve_csv(out / (formula + ".csv"), curve);
    rmtk::io::write_json(out / (formula + ".json"), curve.meta);
    std::printf("wrote %s.csv (%zu points) to %s\n", formula.c_str(), curve.grid.size(),
                out.string().c_str());
    return kExitPass;
}

int cmd_verify(const CommonOpts& opts, const std::string& only) {
    const json cfg = load_config(opts);
    std::vector<std::string> selected;
    if (only.empty()) {
        selected = rmtk::harness::experiment_names();
    } else {
        std::size_t pos = 0;
        while (pos != std::string::npos) {
            auto comma = only.find(',', pos);
            std::string name = only.substr(pos, comma == std::string::npos ? comma : comma - pos);
            if (name.rfind("exp_", 0) == 0) name = name.substr(4);
            const auto& names = rmtk::harness::experiment_names();
            if (std::find(names.begin(), names.end(), name) == names.end())
                throw ConfigError("unknown experiment: " + name);
            selected.push_back(name);
            pos = comma == std::string::npos ? comma : comma + 1;
        }
    }

    const fs::path out(opts.out_dir);
    fs::create_directories(out);
    json cfg_echo = cfg;
    cfg_echo.erase("threads");   // worker cap: results are independent of it
    rmtk::io::write_json(out / "config.json", cfg_echo);

    auto cache = std::make_shared<rmtk::harness::SpectrumCache>();
    bool all_pass = true;
    for (const std::string& name : selected) {
        auto ec = experiment_config(cfg, name);
        ec.cache = cache;
        ec.extra["out_dir"] = (out / name).string();
        fs::create_directories(out / name);
        const auto report = rmtk::harness::run_experiment(name, ec);
        rmtk::io::write_json(out / ("report_" + name + ".json"), report.to_json());
        std::printf("[%s] %-18s %zu checks, %.1fs\n", report.pass ? "PASS" : "FAIL",
                    name.c_str(), report.checks.size(), report.runtime_seconds);
        for (const auto& [note, value] : report.notes)
            std::printf("    note %s = %.3g\n", note.c_str(), value);
        for (const auto& c : report.checks)
            if (!c.pass)
                std::printf("    FAIL %s: measured=%.6g predicted=%.6g tol=%.3g\n",
                            c.name.c_str(), c.measured, c.predicted, c.tolerance);
        all_pass = all_pass && report.pass;
    }
    return all_pass ? kExitPass : kExitCheckFailure;
}

int cmd_report(const std::vector<std::string>& inputs) {
    bool all_pass = true;
    for (const std::string& input : inputs) {
        std::vector<fs::path> paths;
        if (fs::is_directory(input)) {
            for (const auto& e : fs::directory_iterator(input))
                if (e.path().filename().string().rfind("report_", 0) == 0 &&
                    e.path().extension() == ".json")
                    paths.push_back(e.path());
            std::sort(paths.begin(), paths.end());
        } else {
            paths.emplace_back(input);
        }
        for (const auto& path : paths) {
            std::ifstream in(path);
            if (!in) throw rmtk::Error("cannot open report: " + path.string());
            const json r = json::parse(in);
            const bool pass = r.value("pass", false);
            all_pass = all_pass && pass;
            std::printf("[%s] %s (seed %llu)\n", pass ? "PASS" : "FAIL",
                        r.value("experiment", std::string("?")).c_str(),
                        static_cast<unsigned long long>(r.value("seed", 0ULL)));
            for (const auto& c : r.value("checks", json::array()))
                std::printf("  %s %-52s measured=%-12.6g predicted=%-12.6g\n",
                            c.value("pass", false) ? "ok  " : "FAIL",
                            c.value("name", std::string()).c_str(),
                            c.value("measured", 0.0), c.value("predicted", 0.0));
        }
    }
    return all_pass ? kExitPass : kExitCheckFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-matrix toolkit: rank-one coupled Gaussian ensembles"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string only;
    double kappa_flag = 0.0;
    bool kappa_set = false;
    std::vector<std::string> report_inputs;

    auto add_common = [&](CLI::App* sub, bool needs_out = true) {
        sub->add_option("--config", opts.config_path, "JSON config file");
        if (needs_out) sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed, "master seed override")
            ->each([&](const std::string&) { opts.seed_set = true; });
        sub->add_option("--threads", opts.threads, "worker thread cap (0 = serial loop default)");
        sub->add_option("--override", opts.overrides, "config override key=value (repeatable)");
    };

    auto* sample = app.add_subcommand("sample", "sample spectra and write CSVs + manifest");
    add_common(sample);
    auto* theory = app.add_subcommand("theory", "evaluate an analytical curve on a grid");
    add_common(theory);
    auto* verify = app.add_subcommand("verify", "run verification experiments");
    add_common(verify);
    verify->add_option("--only", only, "comma-separated experiment names");
    verify->add_option("--kappa", kappa_flag, "coupling kappa for single-kappa experiments")
        ->each([&](const std::string&) { kappa_set = true; });
    auto* report = app.add_subcommand("report", "summarize report JSON files");
    report->add_option("inputs", report_inputs, "report files or directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfigError;
    }

    try {
        if (kappa_set) opts.overrides.push_back("kappa=" + rmtk::io::format_double(kappa_flag));
        if (sample->parsed()) return cmd_sample(opts);
        if (theory->parsed()) return cmd_theory(opts);
        if (verify->parsed()) return cmd_verify(opts, only);
        if (report->parsed()) return cmd_report(report_inputs);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const rmtk::DomainError& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return kExitRuntimeError;
    } catch (const rmtk::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntimeError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntimeError;
    }
    return kExitConfigError;
}
