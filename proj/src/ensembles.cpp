#include "rmtk/ensembles.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace rmtk::ensembles {

double EnsembleParams::kappa() const {
    return coupling / (sigma * std::sqrt(static_cast<double>(n)));
}

EnsembleParams EnsembleParams::from_kappa(int n, int beta, double sigma, double kappa,
                                          std::uint64_t seed) {
    EnsembleParams p;
    p.n = n;
    p.beta = beta;
    p.sigma = sigma;
    p.coupling = kappa * sigma * std::sqrt(static_cast<double>(n));
    p.seed = seed;
    p.validate();
    return p;
}

EnsembleParams EnsembleParams::with_seed(std::uint64_t s) const {
    EnsembleParams p = *this;
    p.seed = s;
    return p;
}

void EnsembleParams::validate() const {
    if (n < 2) throw DomainError("EnsembleParams: n must be >= 2");
    if (beta != 1 && beta != 2) throw DomainError("EnsembleParams: beta must be 1 or 2");
    if (!(sigma > 0.0)) throw DomainError("EnsembleParams: sigma must be positive");
    if (!std::isfinite(coupling)) throw DomainError("EnsembleParams: coupling must be finite");
}

GaussianMatrix GaussianMatrix::real_symmetric(Eigen::MatrixXd m) {
    if (m.rows() != m.cols()) throw Error("GaussianMatrix: matrix must be square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw Error("GaussianMatrix: matrix is not symmetric");
    GaussianMatrix g;
    g.m_ = std::move(m);
    return g;
}

GaussianMatrix GaussianMatrix::complex_hermitian(Eigen::MatrixXcd m) {
    if (m.rows() != m.cols()) throw Error("GaussianMatrix: matrix must be square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw Error("GaussianMatrix: matrix is not Hermitian");
    GaussianMatrix g;
    g.m_ = std::move(m);
    return g;
}

Eigen::Index GaussianMatrix::dim() const {
    return is_real() ? real().rows() : cplx().rows();
}

double GaussianMatrix::trace() const {
    return is_real() ? real().trace() : cplx().trace().real();
}

double GaussianMatrix::hermiticity_defect() const {
    if (is_real()) return (real() - real().transpose()).cwiseAbs().maxCoeff();
    return (cplx() - cplx().adjoint()).cwiseAbs().maxCoeff();
}

GaussianMatrix sample_gaussian(const EnsembleParams& params) {
    params.validate();
    Rng rng(params.seed);
    const int n = params.n;
    const double s = params.sigma;
    if (params.beta == 1) {
        // Tr G^2 = sum g_ii^2 + 2 sum_{i<j} g_ij^2, so the density
        // exp(-Tr G^2 / 4 sigma^2) means Var(g_ii) = 2 sigma^2 and
        // Var(g_ij) = sigma^2.  Fill order is fixed: row by row, diagonal
        // first, for reproducibility.
        Eigen::MatrixXd m(n, n);
        const double diag_sd = s * std::numbers::sqrt2;
        for (int i = 0; i < n; ++i) {
            m(i, i) = diag_sd * rng.normal();
            for (int j = i + 1; j < n; ++j) {
                const double v = s * rng.normal();
                m(i, j) = v;
                m(j, i) = v;
            }
        }
        auto g = GaussianMatrix::real_symmetric(std::move(m));
        g.set_provenance_seed(params.seed);
        return g;
    }
    // beta = 2: Tr G G+ = sum g_ii^2 + 2 sum_{i<j} |g_ij|^2 with the
    // density exp(-Tr G G+ / 2 sigma^2): Var(g_ii) = sigma^2,
    // Var(Re g_ij) = Var(Im g_ij) = sigma^2 / 2.
    Eigen::MatrixXcd m(n, n);
    const double off_sd = s / std::numbers::sqrt2;
    for (int i = 0; i < n; ++i) {
        m(i, i) = std::complex<double>(s * rng.normal(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            const double re = off_sd * rng.normal();
            const double im = off_sd * rng.normal();
            m(i, j) = std::complex<double>(re, im);
            m(j, i) = std::complex<double>(re, -im);
        }
    }
    auto g = GaussianMatrix::complex_hermitian(std::move(m));
    g.set_provenance_seed(params.seed);
    return g;
}

GaussianMatrix apply_rank_one(const GaussianMatrix& g, double coupling) {
    GaussianMatrix out = [&] {
        if (g.is_real()) {
            Eigen::MatrixXd m = g.real();
            m(0, 0) += coupling;
            return GaussianMatrix::real_symmetric(std::move(m));
        }
        Eigen::MatrixXcd m = g.cplx();
        m(0, 0) += coupling;
        return GaussianMatrix::complex_hermitian(std::move(m));
    }();
    out.set_provenance_seed(g.provenance_seed());
    return out;
}

namespace {

// gauge: scale each column so its largest-magnitude entry is real positive
void fix_gauge(Eigen::MatrixXd& v) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        Eigen::Index imax = 0;
        v.col(c).cwiseAbs().maxCoeff(&imax);
        if (v(imax, c) < 0.0) v.col(c) = -v.col(c);
    }
}

void fix_gauge(Eigen::MatrixXcd& v) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        Eigen::Index imax = 0;
        v.col(c).cwiseAbs().maxCoeff(&imax);
        const std::complex<double> z = v(imax, c);
        const double a = std::abs(z);
        if (a > 0.0) v.col(c) *= std::conj(z) / a;
    }
}

template <class Matrix>
EighResult eigh_impl(const Matrix& m, std::uint64_t seed) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw Error("dense_eigh: eigensolver failed to converge (n=" +
                    std::to_string(m.rows()) + ", seed=" + std::to_string(seed) + ")");
    EighResult r;
    r.eigenvalues = solver.eigenvalues();
    Matrix v = solver.eigenvectors();
    fix_gauge(v);
    r.eigenvectors = std::move(v);
    return r;
}

} // namespace

EighResult dense_eigh(const GaussianMatrix& m) {
    return m.is_real() ? eigh_impl(m.real(), m.provenance_seed())
                       : eigh_impl(m.cplx(), m.provenance_seed());
}

Spectrum extract_spectrum(const EighResult& eigh) {
    Spectrum s;
    s.energies = eigh.eigenvalues;
    if (std::holds_alternative<Eigen::MatrixXd>(eigh.eigenvectors)) {
        const auto& v = std::get<Eigen::MatrixXd>(eigh.eigenvectors);
        s.weights = v.row(0).transpose().cwiseAbs2();
    } else {
        const auto& v = std::get<Eigen::MatrixXcd>(eigh.eigenvectors);
        s.weights = v.row(0).transpose().cwiseAbs2();
    }
    return s;
}

Spectrum fast_sample_spectrum(const EnsembleParams& params) {
    params.validate();
    Rng rng(params.seed);
    const int n = params.n;
    const double s = params.sigma;
    const double beta = static_cast<double>(params.beta);

    // Householder reduction of the dense ensemble gives this tridiagonal law
    // exactly; eigenvalues cost O(N^2) instead of O(N^3).
    Eigen::VectorXd diag(n), sub(n - 1);
    const double diag_sd = s * std::sqrt(2.0 / beta);
    for (int i = 0; i < n; ++i) diag(i) = diag_sd * rng.normal();
    for (int i = 0; i < n - 1; ++i) {
        const double dof = beta * static_cast<double>(n - 1 - i);
        // chi_dof = sqrt(2 Gamma(dof/2))
        sub(i) = s * std::sqrt(2.0 * rng.gamma(0.5 * dof) / beta);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error("fast_sample_spectrum: tridiagonal eigensolver failed (seed=" +
                    std::to_string(params.seed) + ")");

    // weights: symmetric Dirichlet(beta/2), independent of the eigenvalues
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.gamma(0.5 * beta);
    w /= w.sum();

    Spectrum out;
    out.energies = solver.eigenvalues();
    out.weights = std::move(w);
    return out;
}

} // namespace rmtk::ensembles
