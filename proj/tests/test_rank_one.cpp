#include <doctest.h>

#include <cmath>

#include "rmtk/ensembles.hpp"
#include "rmtk/rank_one.hpp"

using namespace rmtk;
using ensembles::EnsembleParams;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

double secular_residual(const Eigen::VectorXd& e, const Eigen::VectorXd& r, double z, double E) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) s += r[i] / (E - e[i]);
    return z * s - 1.0;
}

ensembles::Spectrum random_base(int n, std::uint64_t seed, int beta = 1) {
    EnsembleParams p{n, beta, 1.0, 0.0, seed};
    return ensembles::extract_spectrum(ensembles::dense_eigh(ensembles::sample_gaussian(p)));
}

} // namespace

TEST_CASE("2x2 closed form: golden-ratio roots, weights, overlaps, traces") {
    // e = (-1, 1), r = (1/2, 1/2), Z = 1  ->  E^2 - E - 1 = 0
    const auto e = vec({-1.0, 1.0});
    const auto r = vec({0.5, 0.5});
    const double z = 1.0;
    const auto E = rank_one::secular_solve(e, r, z);
    const double s5 = std::sqrt(5.0);
    CHECK(E[0] == doctest::Approx((1.0 - s5) / 2.0).epsilon(1e-14));
    CHECK(E[1] == doctest::Approx((1.0 + s5) / 2.0).epsilon(1e-14));

    const auto zz = rank_one::perturbed_weights(e, E, z);
    CHECK(zz[0] == doctest::Approx((5.0 - s5) / 10.0).epsilon(1e-13));   // 0.27639
    CHECK(zz[1] == doctest::Approx((5.0 + s5) / 10.0).epsilon(1e-13));   // 0.72361
    CHECK(zz.sum() == doctest::Approx(1.0).epsilon(1e-13));

    const auto od = rank_one::overlap_coefficients(e, E);
    CHECK(od.b_sq[0] == doctest::Approx(0.5).epsilon(1e-13));   // recovers Z r
    CHECK(od.b_sq[1] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(od.a_sq.sum() == doctest::Approx((E - e).sum()).epsilon(1e-13));
    CHECK(od.b_sq.sum() == doctest::Approx((E - e).sum()).epsilon(1e-13));

    const auto c = rank_one::overlap_matrix(e, E, od);
    const Eigen::MatrixXd defect = c * c.transpose() - Eigen::MatrixXd::Identity(2, 2);
    CHECK(defect.cwiseAbs().maxCoeff() < 1e-12);

    // sum e^2 = 2;  sum E^2 - 2 Z sum E z + Z^2 = 3 - 2 + 1 = 2
    const auto res = rank_one::trace_identities(e, E, zz, z);
    CHECK(res.linear < 1e-14);
    CHECK(res.quadratic < 1e-14);
}

TEST_CASE("secular residual and interlacing on random spectra") {
    for (std::uint64_t seed : {10u, 20u, 30u}) {
        const auto base = random_base(48, seed);
        const double z = 0.6 * std::sqrt(48.0);
        const auto E = rank_one::secular_solve(base.energies, base.weights, z);
        for (Eigen::Index a = 0; a < E.size(); ++a) {
            // rescaled residual: the quantisation condition in units of the
            // local term magnitude
            const double res = secular_residual(base.energies, base.weights, z, E[a]);
            CHECK(std::abs(res) < 1e-10);
            CHECK(E[a] > base.energies[a]);
            if (a + 1 < E.size()) CHECK(E[a] < base.energies[a + 1]);
        }
        CHECK(E[E.size() - 1] <= base.energies[E.size() - 1] + z * (1.0 + 1e-12));
    }
}

TEST_CASE("oracle equivalence against dense rediagonalization") {
    for (int n : {16, 64, 128}) {
        for (std::uint64_t seed : {3u, 14u}) {
            EnsembleParams p{n, 1, 1.0, 0.0, seed};
            const auto g = ensembles::sample_gaussian(p);
            const double z = 0.6 * std::sqrt(static_cast<double>(n));
            const auto base = ensembles::extract_spectrum(ensembles::dense_eigh(g));
            const auto dense = ensembles::extract_spectrum(
                ensembles::dense_eigh(ensembles::apply_rank_one(g, z)));
            const auto sec = rank_one::perturb(base, z);
            const double scale = std::sqrt(static_cast<double>(n));
            CHECK((sec.energies - dense.energies).cwiseAbs().maxCoeff() < 1e-8 * scale);
            CHECK((sec.weights - dense.weights).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("oracle equivalence for the complex-Hermitian class") {
    EnsembleParams p{32, 2, 1.0, 0.0, 5};
    const auto g = ensembles::sample_gaussian(p);
    const double z = 1.1 * std::sqrt(32.0);
    const auto base = ensembles::extract_spectrum(ensembles::dense_eigh(g));
    const auto dense =
        ensembles::extract_spectrum(ensembles::dense_eigh(ensembles::apply_rank_one(g, z)));
    const auto sec = rank_one::perturb(base, z);
    CHECK((sec.energies - dense.energies).cwiseAbs().maxCoeff() < 1e-8 * std::sqrt(32.0));
    CHECK((sec.weights - dense.weights).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("negative coupling mirrors the problem") {
    const auto base = random_base(32, 7);
    const double z = -0.8 * std::sqrt(32.0);
    const auto E = rank_one::secular_solve(base.energies, base.weights, z);
    // interlacing from below
    for (Eigen::Index a = 0; a < E.size(); ++a) {
        CHECK(E[a] < base.energies[a]);
        if (a > 0) CHECK(E[a] > base.energies[a - 1]);
    }
    CHECK((E - base.energies).sum() == doctest::Approx(z).epsilon(1e-9));

    EnsembleParams p{32, 1, 1.0, 0.0, 7};
    const auto dense = ensembles::extract_spectrum(
        ensembles::dense_eigh(ensembles::apply_rank_one(ensembles::sample_gaussian(p), z)));
    CHECK((E - dense.energies).cwiseAbs().maxCoeff() < 1e-8 * std::sqrt(32.0));
}

TEST_CASE("involution: solving back with -Z recovers the input spectrum") {
    const auto base = random_base(40, 99);
    const double z = 0.7 * std::sqrt(40.0);
    const auto pert = rank_one::perturb(base, z);
    const auto back = rank_one::perturb(pert, -z);
    CHECK((back.energies - base.energies).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((back.weights - base.weights).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("deflation pins zero-weight states") {
    const auto e = vec({-1.0, 0.0, 1.0});
    const auto r = vec({0.5, 0.0, 0.5});
    const auto E = rank_one::secular_solve(e, r, 1.0);
    const double s5 = std::sqrt(5.0);
    CHECK(E[0] == doctest::Approx((1.0 - s5) / 2.0).epsilon(1e-14));
    CHECK(E[1] == 0.0);   // exact
    CHECK(E[2] == doctest::Approx((1.0 + s5) / 2.0).epsilon(1e-14));
    const auto z = rank_one::perturbed_weights(e, E, 1.0);
    CHECK(z[1] == 0.0);
    CHECK(z.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tiny couplings move the roots by at most the coupling") {
    const auto base = random_base(24, 3);
    const double z = 1e-8;
    const auto E = rank_one::secular_solve(base.energies, base.weights, z);
    CHECK((E - base.energies).cwiseAbs().maxCoeff() <= 2e-8);
    CHECK((E - base.energies).minCoeff() >= 0.0);
}

TEST_CASE("near-degenerate poles are merged without breaking the identities") {
    Eigen::VectorXd e(4), r(4);
    e << -1.0, 0.5, 0.5 + 1e-15, 2.0;
    r << 0.25, 0.25, 0.25, 0.25;
    const double z = 0.9;
    const auto E = rank_one::secular_solve(e, r, z);
    for (Eigen::Index i = 0; i + 1 < 4; ++i) CHECK(E[i] <= E[i + 1]);
    CHECK((E - e).sum() == doctest::Approx(z).epsilon(1e-9));
}

TEST_CASE("weight formula agrees with |a|^2 / Z") {
    const auto base = random_base(32, 17);
    const double z = 0.6 * std::sqrt(32.0);
    const auto pert = rank_one::perturb(base, z);
    const auto od = rank_one::overlap_coefficients(base.energies, pert.energies);
    for (Eigen::Index a = 0; a < 32; ++a)
        CHECK(od.a_sq[a] == doctest::Approx(z * pert.weights[a]).epsilon(1e-9));
    // b^2 = Z r
    for (Eigen::Index a = 0; a < 32; ++a)
        CHECK(od.b_sq[a] == doctest::Approx(z * base.weights[a]).epsilon(1e-9));
    // both sums equal sum(E - e)
    const double gap_sum = (pert.energies - base.energies).sum();
    CHECK(od.a_sq.sum() == doctest::Approx(gap_sum).epsilon(1e-9));
    CHECK(od.b_sq.sum() == doctest::Approx(gap_sum).epsilon(1e-9));
}

TEST_CASE("overlap matrix is unitary at n = 64") {
    const auto base = random_base(64, 21);
    const double z = 0.6 * 8.0;
    const auto pert = rank_one::perturb(base, z);
    const auto od = rank_one::overlap_coefficients(base.energies, pert.energies);
    const auto c = rank_one::overlap_matrix(base.energies, pert.energies, od);
    const Eigen::MatrixXd defect = c * c.transpose() - Eigen::MatrixXd::Identity(64, 64);
    CHECK(defect.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("trace identities at production scale") {
    const auto base = random_base(1000, 8);
    const double z = 0.6 * std::sqrt(1000.0);
    const auto pert = rank_one::perturb(base, z);
    const auto res = rank_one::trace_identities(base.energies, pert.energies, pert.weights, z);
    CHECK(res.linear < 1e-8);
    CHECK(res.quadratic < 1e-8);

    // Z = 0: identically zero residuals
    const auto res0 =
        rank_one::trace_identities(base.energies, base.energies,
                                   base.weights, 0.0);
    CHECK(res0.linear == 0.0);
    CHECK(res0.quadratic == 0.0);
}

TEST_CASE("propagated second component matches dense eigenvectors") {
    const int n = 64;
    EnsembleParams p{n, 1, 1.0, 0.0, 44};
    const auto g = ensembles::sample_gaussian(p);
    const double z = 0.6 * 8.0;
    const auto eigh_g = ensembles::dense_eigh(g);
    const auto& phi = std::get<Eigen::MatrixXd>(eigh_g.eigenvectors);
    const auto base = ensembles::extract_spectrum(eigh_g);
    const auto E = rank_one::secular_solve(base.energies, base.weights, z);

    const Eigen::VectorXd b_signed = std::sqrt(z) * phi.row(0).transpose();
    const auto psi2 = rank_one::propagate_component(base.energies, E, b_signed,
                                                    phi.row(1).transpose());

    const auto eigh_m = ensembles::dense_eigh(ensembles::apply_rank_one(g, z));
    const auto& psi = std::get<Eigen::MatrixXd>(eigh_m.eigenvectors);
    for (Eigen::Index a = 0; a < n; ++a)
        CHECK(psi2[a] * psi2[a] == doctest::Approx(psi(1, a) * psi(1, a)).epsilon(1e-7).scale(1.0));
}

TEST_CASE("oracle equivalence holds away from unit scale") {
    EnsembleParams p{48, 1, 2.5, 0.0, 61};
    const auto g = ensembles::sample_gaussian(p);
    const double z = 0.6 * 2.5 * std::sqrt(48.0);
    const auto base = ensembles::extract_spectrum(ensembles::dense_eigh(g));
    const auto dense =
        ensembles::extract_spectrum(ensembles::dense_eigh(ensembles::apply_rank_one(g, z)));
    const auto sec = rank_one::perturb(base, z);
    CHECK((sec.energies - dense.energies).cwiseAbs().maxCoeff() < 1e-8 * 2.5 * std::sqrt(48.0));
    CHECK((sec.weights - dense.weights).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("error paths: bad inputs are reported") {
    const auto e = vec({0.0, 1.0});
    const auto r = vec({0.5, 0.5});
    CHECK_THROWS_AS(rank_one::secular_solve(e, r, 0.0), DomainError);
    CHECK_THROWS_AS(rank_one::secular_solve(vec({1.0, 0.0}), r, 1.0), Error);
    CHECK_THROWS_AS(rank_one::secular_solve(e, vec({0.5, -0.5}), 1.0), Error);
    // non-interlaced pair trips the sign check
    CHECK_THROWS_AS(rank_one::perturbed_weights(vec({0.0, 1.0}), vec({2.0, 3.0}), 1.0), Error);
}
