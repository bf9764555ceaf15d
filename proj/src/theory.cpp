#include "rmtk/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rmtk/common.hpp"
#include "rmtk/quadrature.hpp"
#include "rmtk/special.hpp"

namespace rmtk::theory {

namespace {

constexpr double kPi = std::numbers::pi;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void check_beta(int beta) {
    if (beta != 1 && beta != 2) throw DomainError("beta must be 1 or 2");
}

// angle of an in-bulk energy, E = 2 sigma sqrt(N) cos(phi)
double phi_of(double energy, const ModelParams& mp) {
    double u = energy / mp.edge();
    u = std::clamp(u, -1.0, 1.0);
    return std::acos(u);
}

} // namespace

double ModelParams::scale() const { return sigma * std::sqrt(static_cast<double>(n)); }
double ModelParams::edge() const { return 2.0 * scale(); }

double wigner_density(double energy, const ModelParams& mp) {
    const double r2 = 4.0 * mp.n * mp.sigma * mp.sigma - energy * energy;
    if (r2 <= 0.0) return 0.0;
    return std::sqrt(r2) / (2.0 * kPi * mp.sigma * mp.sigma);
}

double wigner_count(double energy, const ModelParams& mp) {
    const double u = energy / mp.edge();
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return static_cast<double>(mp.n);
    return mp.n * (0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / kPi);
}

std::complex<double> green0(double energy, const ModelParams& mp) {
    const double s2n = mp.sigma * mp.sigma * mp.n;
    const double disc = energy * energy - 4.0 * s2n;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        // branch with G0 ~ 1/E at infinity
        return {(energy - (energy >= 0.0 ? root : -root)) / (2.0 * s2n), 0.0};
    }
    // boundary value at E + i0+: Im G0 <= 0 so rho = -(N/pi) Im G0
    return {energy / (2.0 * s2n), -std::sqrt(-disc) / (2.0 * s2n)};
}

double bulk_density_phi(double phi, double kappa, const ModelParams& mp) {
    if (phi < 0.0 || phi > kPi) throw DomainError("bulk_density_phi: phi outside [0, pi]");
    if (kappa * kappa == 1.0) throw DomainError("bulk_density_phi: kappa^2 = 1 is singular");
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    // Wigner term 2N/pi sin^2(phi): rho_W(E) dE converted with
    // dE = -2 sigma sqrt(N) sin(phi) dphi, so that the phi-integral is N.
    const double wigner = 2.0 * mp.n / kPi;
    const double corr = 2.0 * kappa * (2.0 * c - kappa) /
                        (kPi * (kappa * kappa - 2.0 * kappa * c + 1.0));
    return (wigner + corr) * s * s;
}

double bulk_density_energy(double energy, double kappa, const ModelParams& mp) {
    if (std::abs(energy) >= mp.edge()) return 0.0;
    const double phi = phi_of(energy, mp);
    const double s = std::sin(phi);
    if (s == 0.0) return 0.0;
    return bulk_density_phi(phi, kappa, mp) / (mp.edge() * s);
}

double bulk_count(double energy, double kappa, const ModelParams& mp) {
    if (energy <= -mp.edge()) return 0.0;
    const double hi = std::min(energy, mp.edge());
    // integrate in the angle variable: phi from pi (lower edge) down to phi(hi)
    const double phi_hi = phi_of(hi, mp);
    auto f = [&](double phi) { return bulk_density_phi(phi, kappa, mp); };
    const auto q = quadrature::integrate(f, phi_hi, kPi, 1e-10, 1e-12);
    return q.value;
}

CollectiveState collective_state(double kappa, const ModelParams& mp) {
    if (!(kappa * kappa > 1.0))
        throw DomainError("collective_state: requires kappa^2 > 1");
    CollectiveState c;
    c.energy = mp.scale() * (kappa + 1.0 / kappa);
    c.weight = 1.0 - 1.0 / (kappa * kappa);
    c.half_width = 2.0 * mp.sigma * (1.0 - 1.0 / (kappa * kappa));
    return c;
}

double collective_density(double energy, double kappa, const ModelParams& mp) {
    const CollectiveState c = collective_state(kappa, mp);
    const double d = energy - c.energy;
    const double r2 = c.half_width * c.half_width - d * d;
    if (r2 <= 0.0) return 0.0;
    return std::sqrt(r2) / (kPi * mp.sigma * c.half_width);
}

double l_of_energy(double energy, double kappa, const ModelParams& mp) {
    const double denom = kappa * kappa + 1.0 - kappa * energy / mp.scale();
    if (!(denom > 0.0))
        throw DomainError("l_of_energy: nonpositive denominator (energy beyond validity)");
    return 1.0 / denom;
}

double modified_pt_pdf(double x, double l, int beta) {
    check_beta(beta);
    if (!(x > 0.0)) throw DomainError("modified_pt_pdf: x must be positive");
    if (!(l > 0.0)) throw DomainError("modified_pt_pdf: l must be positive");
    if (beta == 1) return std::exp(-x / (2.0 * l)) / std::sqrt(2.0 * kPi * l * x);
    return std::exp(-x / l) / l;
}

double modified_pt_cdf(double x, double l, int beta) {
    check_beta(beta);
    if (!(l > 0.0)) throw DomainError("modified_pt_cdf: l must be positive");
    if (x <= 0.0) return 0.0;
    if (beta == 1) return std::erf(std::sqrt(x / (2.0 * l)));
    return -std::expm1(-x / l);
}

double lagrange_mu(double kappa, int beta, int n) {
    check_beta(beta);
    if (!(kappa * kappa < 1.0))
        throw DomainError("lagrange_mu: closed form requires kappa^2 < 1");
    return beta * n * (kappa * kappa + 1.0) / 2.0;
}

double lagrange_mu(double kappa, int beta, int n, double z_c) {
    check_beta(beta);
    if (!(z_c >= 0.0 && z_c < 1.0)) throw DomainError("lagrange_mu: z_c must be in [0,1)");
    if (!(std::abs(kappa) * (1.0 - z_c) < 1.0))
        throw DomainError("lagrange_mu: requires |kappa| (1 - z_c) < 1");
    const double om = 1.0 - z_c;
    return 0.5 * beta * n * (kappa * kappa * om + 1.0 / om);
}

double gaussian_moment_coeff(double q, int beta) {
    check_beta(beta);
    if (q < 0.0) throw DomainError("gaussian_moment_coeff: q must be nonnegative");
    if (beta == 1) return std::pow(2.0, q) * std::tgamma(q + 0.5) / std::sqrt(kPi);
    return std::tgamma(q + 1.0);
}

namespace {

struct WindowContext {
    double phi_lo;   // angle of e2 (upper energy)
    double phi_hi;   // angle of e1 (lower energy)
    double count;    // integral of rho_W over the window
};

WindowContext window_context(double e1, double e2, const ModelParams& mp) {
    if (!(e1 < e2)) throw DomainError("window: requires e1 < e2");
    if (e1 < -mp.edge() || e2 > mp.edge())
        throw DomainError("window: outside the bulk support");
    WindowContext w;
    w.phi_lo = phi_of(e2, mp);
    w.phi_hi = phi_of(e1, mp);
    auto f = [&](double phi) {
        const double s = std::sin(phi);
        return 2.0 * mp.n / kPi * s * s;
    };
    w.count = quadrature::integrate(f, w.phi_lo, w.phi_hi, 1e-12, 1e-13).value;
    if (!(w.count > 0.0)) throw DomainError("window: empty window");
    return w;
}

double inv_l_phi(double phi, double kappa) {
    return kappa * kappa + 1.0 - 2.0 * kappa * std::cos(phi);
}

} // namespace

double window_moment(double q, double e1, double e2, double kappa, int beta,
                     const ModelParams& mp) {
    check_beta(beta);
    if (q < 0.0) throw DomainError("window_moment: q must be nonnegative");
    const WindowContext w = window_context(e1, e2, mp);
    auto f = [&](double phi) {
        const double s = std::sin(phi);
        return 2.0 * mp.n / kPi * s * s * std::pow(inv_l_phi(phi, kappa), -q);
    };
    const double num = quadrature::integrate(f, w.phi_lo, w.phi_hi, 1e-12, 1e-13).value;
    return gaussian_moment_coeff(q, beta) * num / w.count;
}

double window_pdf(double x, double e1, double e2, double kappa, int beta,
                  const ModelParams& mp) {
    check_beta(beta);
    if (!(x > 0.0)) throw DomainError("window_pdf: x must be positive");
    const WindowContext w = window_context(e1, e2, mp);
    auto f = [&](double phi) {
        const double s = std::sin(phi);
        const double invl = inv_l_phi(phi, kappa);
        return 2.0 * mp.n / kPi * s * s * modified_pt_pdf(x, 1.0 / invl, beta);
    };
    return quadrature::integrate(f, w.phi_lo, w.phi_hi, 1e-9, 1e-11).value / w.count;
}

double window_amplitude_cdf(double x, double e1, double e2, double kappa,
                            const ModelParams& mp) {
    const WindowContext w = window_context(e1, e2, mp);
    auto f = [&](double phi) {
        const double s = std::sin(phi);
        const double invl = inv_l_phi(phi, kappa);
        return 2.0 * mp.n / kPi * s * s * normal_cdf(x * std::sqrt(invl));
    };
    return quadrature::integrate(f, w.phi_lo, w.phi_hi, 1e-10, 1e-11).value / w.count;
}

double fullwindow_factor(double x, double kappa, int beta) {
    check_beta(beta);
    if (x < 0.0) throw DomainError("fullwindow_factor: x must be nonnegative");
    if (kappa == 0.0) return 1.0;
    if (beta == 1) {
        auto f = [&](double phi) {
            const double s = std::sin(phi);
            const double c = std::cos(phi);
            const double invl = kappa * kappa + 1.0 - 2.0 * kappa * c;
            return 2.0 / kPi * s * s * std::sqrt(invl) *
                   std::exp(-0.5 * (kappa * kappa - 2.0 * kappa * c) * x);
        };
        return quadrature::integrate_gl(64, 0.0, kPi, f);
    }
    // beta = 2: the full-bulk mixture in closed Bessel form,
    //   F_2(x) = exp(-k^2 x) (2/w) [(k^2+1) I1(w) - 2k I2(w)],  w = 2 k x.
    const double w = 2.0 * kappa * x;
    const double k2p1 = kappa * kappa + 1.0;
    if (std::abs(w) < 0.5) {
        // small-argument series of 2 I1(w)/w and 2 I2(w)/w
        const double w2 = w * w;
        const double r1 = 1.0 + w2 / 8.0 + w2 * w2 / 192.0 + w2 * w2 * w2 / 9216.0;
        const double r2 = w / 4.0 * (1.0 + w2 / 12.0 + w2 * w2 / 384.0);
        return std::exp(-kappa * kappa * x) * (k2p1 * r1 - 2.0 * kappa * r2);
    }
    const double i1 = special::bessel_i1(w);
    const double i2 = special::bessel_i2(w);
    return std::exp(-kappa * kappa * x) * 2.0 * (k2p1 * i1 - 2.0 * kappa * i2) / w;
}

double fullwindow_factor_series(double x, double kappa, int beta) {
    check_beta(beta);
    const double k2 = kappa * kappa;
    const double k4 = k2 * k2;
    if (beta == 1) {
        return 1.0 + k2 / 8.0 * (x * x - 6.0 * x + 3.0) +
               k4 / 192.0 * (((x - 16.0) * x + 54.0) * x * x - 24.0 * x - 3.0);
    }
    // expansion of the full-bulk mixture factor (beta = 2) through kappa^4
    return 1.0 + k2 / 2.0 * (x * x - 4.0 * x + 2.0) +
           k4 / 12.0 * (((x - 10.0) * x + 24.0) * x * x - 12.0 * x);
}

} // namespace rmtk::theory
