#ifndef RMTK_RANK_ONE_HPP
#define RMTK_RANK_ONE_HPP

#include <Eigen/Dense>

#include "rmtk/ensembles.hpp"

namespace rmtk::rank_one {

using ensembles::Spectrum;

// Perturbed eigenvalues from the quantisation condition
//   Z sum_b r_b / (E - e_b) = 1,
// one root per interval between consecutive poles plus one root beyond the
// last pole (Z > 0; mirrored for Z < 0).  Interlacing holds exactly on the
// returned array.  Near-zero weights are deflated: their roots are pinned
// to the corresponding pole.
Eigen::VectorXd secular_solve(const Eigen::VectorXd& e, const Eigen::VectorXd& r, double coupling);

// First-component weights of the perturbed eigenvectors via the closed-form
// products  z_a = prod_g (E_a - e_g) / (Z prod_{g!=a} (E_a - E_g)),
// evaluated as log-magnitude sums with separate sign parity.
Eigen::VectorXd perturbed_weights(const Eigen::VectorXd& e, const Eigen::VectorXd& E, double coupling);

struct OverlapData {
    Eigen::VectorXd a_sq;   // |a_a|^2
    Eigen::VectorXd b_sq;   // |b_a|^2 (= Z r_a for the canonical channel vector)
};

// Closed-form overlap coefficients from the Cauchy-determinant solution of
// the quantisation conditions.
OverlapData overlap_coefficients(const Eigen::VectorXd& e, const Eigen::VectorXd& E);

// C_ab = a_a b_b / (E_a - e_b) in the positive gauge; unitary by
// construction (rows map the unperturbed eigenbasis to the perturbed one).
Eigen::MatrixXd overlap_matrix(const Eigen::VectorXd& e, const Eigen::VectorXd& E,
                               const OverlapData& overlaps);

struct TraceResiduals {
    double linear;      // | sum(E - e) - Z | / |Z|
    double quadratic;   // | sum e^2 - (sum E^2 - 2 Z sum E z + Z^2) | / sum e^2
};

// Residuals of the two exact trace identities; thresholds are applied by
// the caller.
TraceResiduals trace_identities(const Eigen::VectorXd& e, const Eigen::VectorXd& E,
                                const Eigen::VectorXd& z, double coupling);

// Pipeline helper: full (e,r) -> (E,z) update.  Z=0 returns the input
// unchanged; Z<0 is solved through the sign-reflection symmetry of the
// problem.
Spectrum perturb(const Spectrum& s, double coupling);

// Row j of the perturbed eigenvectors expanded over the unperturbed basis,
//   Psi_j(a) = a_a sum_b b_b phi_b / (E_a - e_b),
// with the signed channel overlaps b_b (real symmetric case).  phi is the
// j-th component row of the unperturbed eigenvectors.
Eigen::VectorXd propagate_component(const Eigen::VectorXd& e, const Eigen::VectorXd& E,
                                    const Eigen::VectorXd& b_signed, const Eigen::VectorXd& phi);

} // namespace rmtk::rank_one

#endif
