#ifndef RMTK_THEORY_HPP
#define RMTK_THEORY_HPP

#include <complex>
#include <string>
#include <vector>

#include "json.hpp"
#include "rmtk/common.hpp"

namespace rmtk::theory {

// Scale context shared by the closed-form predictions: matrix dimension N
// and entry scale sigma.  Energies are always in the same units as the
// spectra (semicircle support [-2 sigma sqrt(N), 2 sigma sqrt(N)]).
struct ModelParams {
    int n = 1000;
    double sigma = 1.0;

    double scale() const;        // sigma sqrt(N)
    double edge() const;         // 2 sigma sqrt(N)
};

// Wigner semicircle density, integral N over the support.
double wigner_density(double energy, const ModelParams& mp);

// Integrated semicircle density from the lower edge: the mean counting
// function used for unfolding.
double wigner_count(double energy, const ModelParams& mp);

// Mean resolvent of the unperturbed ensemble, boundary value at E + i0+.
// Branch: Im G0 <= 0 on the support and G0 ~ 1/E for |E| -> inf, so the
// density is -(N/pi) Im G0.
std::complex<double> green0(double energy, const ModelParams& mp);

// Mean level density in the angle variable E = 2 sigma sqrt(N) cos(phi):
//   rho(phi) = (2N/pi + 2 kappa (2 cos phi - kappa) /
//               (pi (kappa^2 - 2 kappa cos phi + 1))) sin^2 phi.
// Integrates to N for kappa^2 < 1 and to N - 1 + kappa^-2 for kappa^2 > 1.
double bulk_density_phi(double phi, double kappa, const ModelParams& mp);

// The same density converted to the energy variable (zero outside the bulk).
double bulk_density_energy(double energy, double kappa, const ModelParams& mp);

// Integral of bulk_density_energy from the lower edge up to `energy`.
double bulk_count(double energy, double kappa, const ModelParams& mp);

struct CollectiveState {
    double energy;      // sigma sqrt(N) (kappa + 1/kappa)
    double weight;      // 1 - kappa^-2
    double half_width;  // 2 sigma (1 - kappa^-2)
};

// Defined for kappa^2 > 1 only; throws DomainError otherwise.
CollectiveState collective_state(double kappa, const ModelParams& mp);

// Semicircle of integral 1 - kappa^-2 centred on the collective energy.
double collective_density(double energy, double kappa, const ModelParams& mp);

// Energy-dependent mean of x = N |Psi_1|^2:
//   l(E) = (kappa^2 + 1 - kappa E / (sigma sqrt(N)))^-1.
// Throws DomainError when the denominator is not positive (beyond the
// validity region, e.g. at or above the collective energy).
double l_of_energy(double energy, double kappa, const ModelParams& mp);

// Porter-Thomas-type density of x = N |Psi_1|^2 with mean l:
//   P_beta(x) = (2 pi x)^(beta/2 - 1) l^(-beta/2) exp(-beta x / (2 l)).
double modified_pt_pdf(double x, double l, int beta);
double modified_pt_cdf(double x, double l, int beta);

// Lagrange multiplier enforcing sum z = 1: beta N (kappa^2 + 1)/2 for
// kappa^2 < 1.
double lagrange_mu(double kappa, int beta, int n);

// kappa^2 > 1 branch, mu(z_c) = (beta N / 2)(kappa^2 (1-z_c) + 1/(1-z_c)),
// valid for |kappa| (1 - z_c) < 1; equals the kappa^2 < 1 form at the
// saddle z_c = 1 - kappa^-2.
double lagrange_mu(double kappa, int beta, int n, double z_c);

// Gaussian moments c_beta(q): c_1 = 2^q Gamma(q+1/2)/sqrt(pi), c_2 = Gamma(q+1).
double gaussian_moment_coeff(double q, int beta);

// Window moment of x over energies in [e1, e2]:
//   <x^q> = c_beta(q)/dN int rho_W(E) l(E)^q dE,  dN = int rho_W.
double window_moment(double q, double e1, double e2, double kappa, int beta,
                     const ModelParams& mp);

// Width distribution pooled over a finite window: the rho_W-weighted
// mixture of the fixed-energy densities.
double window_pdf(double x, double e1, double e2, double kappa, int beta,
                  const ModelParams& mp);

// Zero-mean Gaussian CDF of the pooled amplitude distribution over a
// window (variance l(E) mixture); used as the KS reference for amplitude
// samples.
double window_amplitude_cdf(double x, double e1, double e2, double kappa,
                            const ModelParams& mp);

// Full-bulk correction factor F_beta with pdf(x) = P_beta(x; l=1) F_beta(x).
// beta=1: fixed 64-node Gauss-Legendre evaluation of
//   (2/pi) int sin^2 p sqrt(k^2+1-2k cos p) exp(-(k^2-2k cos p) x/2) dp.
// beta=2: closed Bessel form of the same mixture,
//   F_2(x) = exp(-k^2 x) 2[(k^2+1) I1(w) - 2k I2(w)]/w,  w = 2 k x,
// which matches the windowed mixture exactly (first moment 1).
double fullwindow_factor(double x, double kappa, int beta);

// Small-kappa expansion of fullwindow_factor through kappa^4.
double fullwindow_factor_series(double x, double kappa, int beta);

struct TheoryCurve {
    std::vector<double> grid;
    std::vector<double> values;
    std::string formula;
    nlohmann::json meta;
};

} // namespace rmtk::theory

#endif
