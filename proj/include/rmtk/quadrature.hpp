#ifndef RMTK_QUADRATURE_HPP
#define RMTK_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace rmtk::quadrature {

// Nodes and weights on [-1,1], computed by Newton iteration on the Legendre
// recurrence.  Cached per order.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussLegendreRule& gauss_legendre(int order);

double integrate_gl(int order, double a, double b, const std::function<double(double)>& f);

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions = 0;
};

// Adaptive Gauss-Kronrod 15(7), bisecting the worst interval until the
// summed error estimate is below max(abs_tol, rel_tol*|value|).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-10, double rel_tol = 0.0, int max_subdivisions = 400);

} // namespace rmtk::quadrature

#endif
