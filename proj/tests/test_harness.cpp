#include <doctest.h>

#include <cmath>

#include <fstream>

#include "rmtk/harness.hpp"
#include "rmtk/io.hpp"
#include "rmtk/rank_one.hpp"
#include "rmtk/theory.hpp"

using namespace rmtk;
using ensembles::EnsembleParams;
using harness::ExperimentConfig;

namespace {

ExperimentConfig small_config(std::uint64_t seed = 1) {
    ExperimentConfig cfg;
    cfg.params = {64, 1, 1.0, 0.0, seed};
    cfg.realizations = 4;
    cfg.threads = 2;
    return cfg;
}

} // namespace

TEST_CASE("report json carries the emitted schema") {
    harness::Report rep;
    rep.experiment = "demo";
    rep.seed = 42;
    rep.config_echo = {{"x", 1}};
    rep.add("close", 1.0, 1.001, 0.01);
    rep.add("far", 1.0, 2.0, 0.1);
    CHECK(rep.checks[0].pass);
    CHECK_FALSE(rep.checks[1].pass);
    CHECK_FALSE(rep.pass);
    const auto j = rep.to_json();
    CHECK(j.contains("experiment"));
    CHECK(j.contains("seed"));
    CHECK(j.contains("config"));
    CHECK(j.contains("checks"));
    CHECK(j.contains("pass"));
    CHECK(!j.contains("runtime_seconds"));   // console-only, keeps files reproducible
    CHECK(j["checks"].size() == 2);
}

TEST_CASE("spectrum cache returns bit-identical realizations") {
    auto cfg = small_config();
    cfg.cache = std::make_shared<harness::SpectrumCache>();
    const auto a = harness::sample_realizations(cfg, cfg.params, 3);
    const auto b = harness::sample_realizations(cfg, cfg.params, 3);
    ExperimentConfig fresh = small_config();
    const auto c = harness::sample_realizations(fresh, fresh.params, 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(a[i].get() == b[i].get());   // cache hit
        CHECK(a[i]->energies == c[i]->energies);
        CHECK(a[i]->weights == c[i]->weights);
    }
}

TEST_CASE("default windows follow the sqrt(N) convention") {
    EnsembleParams p{1000, 1, 1.0, 0.0, 1};
    const auto w = harness::default_windows(p);
    REQUIRE(w.size() == 2);
    const double s = std::sqrt(1000.0);
    CHECK(w[0].lo == doctest::Approx(-0.5 * s));
    CHECK(w[0].hi == doctest::Approx(0.5 * s));
    CHECK(w[1].lo == doctest::Approx(0.5 * s));
    CHECK(w[1].hi == doctest::Approx(1.5 * s));
}

TEST_CASE("secular_vs_dense experiment at reduced size") {
    auto cfg = small_config();
    cfg.extra = {{"n", 32}, {"seeds", 12}, {"unitarity_seeds", 2}, {"identities_realizations", 2}};
    const auto rep = harness::exp_secular_vs_dense(cfg);
    CHECK(rep.pass);
}

TEST_CASE("collective experiment rejects kappa^2 <= 1") {
    auto cfg = small_config();
    cfg.extra["kappa"] = 0.5;
    CHECK_THROWS_AS(harness::exp_collective(cfg), DomainError);
}

TEST_CASE("below threshold the top state carries O(1/N) weight") {
    // kappa = 0.5: l at the upper edge is 1/(1-kappa)^2 = 4, so
    // P(N z_top > 20) is the chi^2_1 tail beyond 5, about 2.5%
    const int n = 400;
    EnsembleParams p{n, 1, 1.0, 0.0, 321};
    const double z = 0.5 * std::sqrt(static_cast<double>(n));
    int below = 0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
        const auto base = ensembles::extract_spectrum(
            ensembles::dense_eigh(ensembles::sample_gaussian(p.with_seed(4500u + r))));
        const auto pert = rank_one::perturb(base, z);
        if (n * pert.weights[n - 1] < 20.0) ++below;
    }
    CHECK(below >= static_cast<int>(0.9 * reps));
}

TEST_CASE("experiment registry dispatches every name") {
    for (const auto& name : harness::experiment_names()) {
        CHECK_NOTHROW((void)name);
    }
    auto cfg = small_config();
    CHECK_THROWS_AS(harness::run_experiment("nope", cfg), Error);
}

TEST_CASE("results are independent of the parallel schedule") {
    auto cfg1 = small_config();
    cfg1.threads = 1;
    auto cfg2 = small_config();
    cfg2.threads = 2;
    const auto a = harness::sample_realizations(cfg1, cfg1.params, 6);
    const auto b = harness::sample_realizations(cfg2, cfg2.params, 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(a[i]->energies == b[i]->energies);
        CHECK(a[i]->weights == b[i]->weights);
    }
    cfg1.extra = {{"n", 24}, {"seeds", 6}, {"unitarity_seeds", 1}, {"identities_realizations", 1}};
    cfg2.extra = cfg1.extra;
    const auto ra = harness::exp_secular_vs_dense(cfg1);
    const auto rb = harness::exp_secular_vs_dense(cfg2);
    REQUIRE(ra.checks.size() == rb.checks.size());
    for (std::size_t i = 0; i < ra.checks.size(); ++i)
        CHECK(ra.checks[i].measured == rb.checks[i].measured);
}

TEST_CASE("spectrum csv round-trips at full precision") {
    ensembles::Spectrum s;
    s.energies = Eigen::Vector3d(-1.0 / 3.0, 0.1, 7.0e99);
    s.weights = Eigen::Vector3d(0.5, 0.25, 0.25);
    const auto path = std::filesystem::temp_directory_path() / "rmtk_spec_test.csv";
    io::write_spectrum_csv(path, s, true);
    std::ifstream in(path);
    std::string header, line1;
    std::getline(in, header);
    std::getline(in, line1);
    CHECK(header == "alpha,E,z");
    const auto c1 = line1.find(','), c2 = line1.rfind(',');
    CHECK(std::stod(line1.substr(c1 + 1, c2 - c1 - 1)) == -1.0 / 3.0);   // 17 digits round-trip
    const std::string h1 = io::file_hash(path);
    io::write_spectrum_csv(path, s, true);
    CHECK(io::file_hash(path) == h1);
    std::filesystem::remove(path);
}

TEST_CASE("unknown tolerances fall back to defaults") {
    auto cfg = small_config();
    cfg.tolerances["weight_rel"] = 0.5;
    CHECK(cfg.tolerance("weight_rel", 0.02) == 0.5);
    CHECK(cfg.tolerance("missing", 0.07) == 0.07);
    cfg.tolerances["bad"] = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}
