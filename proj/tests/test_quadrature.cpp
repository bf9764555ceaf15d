#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rmtk/quadrature.hpp"

using namespace rmtk;
constexpr double kPi = std::numbers::pi;

TEST_CASE("adaptive gauss-kronrod on smooth integrands") {
    auto r = quadrature::integrate([](double x) { return std::sin(x) * std::sin(x); }, 0.0, kPi);
    CHECK(r.value == doctest::Approx(kPi / 2).epsilon(1e-12));

    r = quadrature::integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-12);
    CHECK(r.value == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature handles endpoint sqrt singularities") {
    auto r = quadrature::integrate([](double x) { return 1.0 / std::sqrt(x); }, 1e-300, 1.0, 1e-9,
                                   0.0, 2000);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));

    // semicircle edge
    auto s = quadrature::integrate([](double x) { return std::sqrt(1.0 - x * x); }, -1.0, 1.0, 1e-12);
    CHECK(s.value == doctest::Approx(kPi / 2).epsilon(1e-10));
}

TEST_CASE("reversed limits flip the sign") {
    auto fwd = quadrature::integrate([](double x) { return x * x; }, 0.0, 2.0);
    auto bwd = quadrature::integrate([](double x) { return x * x; }, 2.0, 0.0);
    CHECK(fwd.value == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
    CHECK(bwd.value == doctest::Approx(-fwd.value).epsilon(1e-13));
}

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
    // order n is exact through degree 2n-1
    const auto& rule = quadrature::gauss_legendre(64);
    CHECK(rule.nodes.size() == 64);
    double sum_w = 0.0;
    for (double w : rule.weights) sum_w += w;
    CHECK(sum_w == doctest::Approx(2.0).epsilon(1e-14));

    const double v = quadrature::integrate_gl(8, 0.0, 1.0, [](double x) { return std::pow(x, 15); });
    CHECK(v == doctest::Approx(1.0 / 16.0).epsilon(1e-13));
}

TEST_CASE("fixed 64-node rule matches adaptive on the window kernel") {
    // the kernel used by the full-window factor
    const double kappa = 0.6, x = 3.0;
    auto f = [&](double p) {
        const double c = std::cos(p);
        const double invl = kappa * kappa + 1.0 - 2.0 * kappa * c;
        return 2.0 / kPi * std::sin(p) * std::sin(p) * std::sqrt(invl) *
               std::exp(-0.5 * (kappa * kappa - 2.0 * kappa * c) * x);
    };
    const double fixed = quadrature::integrate_gl(64, 0.0, kPi, f);
    const double adaptive = quadrature::integrate(f, 0.0, kPi, 1e-12).value;
    CHECK(fixed == doctest::Approx(adaptive).epsilon(1e-9));
}
