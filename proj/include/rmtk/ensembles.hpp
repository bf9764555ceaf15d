#ifndef RMTK_ENSEMBLES_HPP
#define RMTK_ENSEMBLES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <variant>

#include "rmtk/common.hpp"

namespace rmtk::ensembles {

// Gaussian ensemble with a rank-one channel coupling on the (1,1) entry.
// The matrix density is ~ exp(-(beta/4 sigma^2) Tr G G+), which fixes the
// entry variances: beta=1 diag 2 sigma^2, off-diag sigma^2; beta=2 diag
// sigma^2 (real), off-diag Re/Im sigma^2/2 each.  Semicircle radius is
// then 2 sigma sqrt(N).
struct EnsembleParams {
    int n = 2;
    int beta = 1;            // Dyson index, 1 (real symmetric) or 2 (complex Hermitian)
    double sigma = 1.0;
    double coupling = 0.0;   // Z
    std::uint64_t seed = 1;

    double kappa() const;    // Z / (sigma sqrt(N))
    static EnsembleParams from_kappa(int n, int beta, double sigma, double kappa, std::uint64_t seed);
    EnsembleParams with_seed(std::uint64_t s) const;
    void validate() const;   // throws DomainError on violation
};

class GaussianMatrix {
public:
    static GaussianMatrix real_symmetric(Eigen::MatrixXd m);
    static GaussianMatrix complex_hermitian(Eigen::MatrixXcd m);

    bool is_real() const { return std::holds_alternative<Eigen::MatrixXd>(m_); }
    int beta() const { return is_real() ? 1 : 2; }
    Eigen::Index dim() const;
    const Eigen::MatrixXd& real() const { return std::get<Eigen::MatrixXd>(m_); }
    const Eigen::MatrixXcd& cplx() const { return std::get<Eigen::MatrixXcd>(m_); }
    double trace() const;
    // max |M - M+| entry, used by the dense_eigh precondition
    double hermiticity_defect() const;

    // seed the matrix was sampled from (0 when hand-built); carried into
    // eigensolver diagnostics
    std::uint64_t provenance_seed() const { return provenance_seed_; }
    void set_provenance_seed(std::uint64_t s) { provenance_seed_ = s; }

private:
    GaussianMatrix() = default;
    std::variant<Eigen::MatrixXd, Eigen::MatrixXcd> m_;
    std::uint64_t provenance_seed_ = 0;
};

struct EighResult {
    Eigen::VectorXd eigenvalues;    // ascending
    std::variant<Eigen::MatrixXd, Eigen::MatrixXcd> eigenvectors; // orthonormal columns
};

// Eigenvalues paired with first-component weights; (e, r) for the
// unperturbed matrix G, (E, z) for M = G + Z e1 e1^T.
struct Spectrum {
    Eigen::VectorXd energies;   // ascending
    Eigen::VectorXd weights;    // |first component|^2, sums to 1
    Eigen::Index size() const { return energies.size(); }
};
using UnperturbedSpectrum = Spectrum;
using PerturbedSpectrum = Spectrum;

GaussianMatrix sample_gaussian(const EnsembleParams& params);

// M = G + Z e1 e1^T: only the (0,0) entry changes.
GaussianMatrix apply_rank_one(const GaussianMatrix& g, double coupling);

// Dense self-adjoint eigendecomposition.  Columns are gauge-fixed so the
// largest-magnitude component of each eigenvector is real positive.
EighResult dense_eigh(const GaussianMatrix& m);

Spectrum extract_spectrum(const EighResult& eigh);

// Equal-in-distribution sampler avoiding the O(N^3) dense path: eigenvalues
// from the tridiagonal beta-ensemble reduction (diag N(0, 2 sigma^2/beta),
// k-th off-diagonal sigma chi_{beta(N-k)}/sqrt(beta)), weights from a
// symmetric Dirichlet(beta/2) draw; the two are independent.
Spectrum fast_sample_spectrum(const EnsembleParams& params);

} // namespace rmtk::ensembles

#endif
