#include "rmtk/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rmtk/common.hpp"

namespace rmtk::special {

namespace {

constexpr double kSeriesCut = 15.0;
constexpr double kOverflowCut = 700.0;

// ascending series for I_nu, nu integer: sum_k (y/2)^(2k+nu) / (k! (k+nu)!)
double bessel_i_series(double y, int nu) {
    const double q = 0.25 * y * y;
    double factorial = 1.0;
    for (int j = 2; j <= nu; ++j) factorial *= j;
    double term = std::pow(0.5 * y, nu) / factorial;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * (k + nu));
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

// large-argument expansion: I_nu(y) ~ e^y / sqrt(2 pi y) * sum_k (-1)^k a_k(nu) / (8y)^k,
// truncated at the smallest term
double bessel_i_asymptotic(double y, int nu) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0, prev = std::numeric_limits<double>::max();
    const double z8 = 8.0 * y;
    for (int k = 1; k < 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (k * z8);
        if (std::abs(term) >= prev) break;
        sum += term;
        prev = std::abs(term);
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::exp(y) / std::sqrt(2.0 * std::numbers::pi * y) * sum;
}

double bessel_i(double y, int nu) {
    if (y < 0.0) throw DomainError("bessel_i: argument must be nonnegative");
    if (y > kOverflowCut) throw Error("bessel_i: argument > 700 overflows double range");
    if (y < kSeriesCut) return bessel_i_series(y, nu);
    return bessel_i_asymptotic(y, nu);
}

} // namespace

double bessel_i0(double y) { return bessel_i(y, 0); }
double bessel_i1(double y) { return bessel_i(y, 1); }
double bessel_i2(double y) { return bessel_i(y, 2); }

double kolmogorov_q(double lambda) {
    if (lambda <= 0.04) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double t = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1) ? t : -t;
        if (t < 1e-18) break;
    }
    const double q = 2.0 * sum;
    return std::min(1.0, std::max(0.0, q));
}

} // namespace rmtk::special
