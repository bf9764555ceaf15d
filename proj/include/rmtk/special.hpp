#ifndef RMTK_SPECIAL_HPP
#define RMTK_SPECIAL_HPP

namespace rmtk::special {

// Modified Bessel functions of the first kind.  Power series below
// |y| = 15, large-argument asymptotic expansion beyond; relative error
// <= 1e-12 on [0, 700].  Arguments beyond ~700 overflow double range and
// throw (rmtk::Error) rather than returning inf.
double bessel_i0(double y);
double bessel_i1(double y);
double bessel_i2(double y);

// Survival function of the Kolmogorov distribution,
// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2), 100 terms.
double kolmogorov_q(double lambda);

} // namespace rmtk::special

#endif
