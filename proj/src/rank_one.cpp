#include "rmtk/rank_one.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rmtk/common.hpp"

namespace rmtk::rank_one {

namespace {

constexpr double kDeflationWeight = 1e-14;   // relative to max weight
constexpr double kMergeSpacing = 1e-13;      // relative to the spectral scale

void check_inputs(const Eigen::VectorXd& e, const Eigen::VectorXd& r) {
    if (e.size() != r.size() || e.size() == 0)
        throw Error("secular input: e and r must be nonempty with equal length");
    for (Eigen::Index i = 0; i + 1 < e.size(); ++i)
        if (!(e[i] <= e[i + 1]))
            throw Error("secular input: eigenvalues must be ascending (index " +
                        std::to_string(i) + ")");
    for (Eigen::Index i = 0; i < r.size(); ++i)
        if (!(r[i] >= -1e-15) || !std::isfinite(r[i]))
            throw Error("secular input: negative or non-finite weight (index " +
                        std::to_string(i) + ")");
}

Eigen::VectorXd reflect(const Eigen::VectorXd& v) {
    return -v.reverse();
}

// One root of f(t) = Z sum w_k / (t - delta_k) - 1 on the open bracket
// (t_lo, t_hi), shifted so the nearest pole is at t = 0.  f is strictly
// decreasing (Z > 0).  Newton steps are taken only when they stay inside
// the sign bracket, and every other iteration bisects, so the bracket
// provably collapses; the only stopping criterion is the bracket width
// (a step-size criterion can fire spuriously next to a pole, where the
// slope is enormous and Newton steps are tiny).
double solve_on_bracket(const std::vector<double>& delta, const std::vector<double>& w,
                        double coupling, double t_lo, double t_hi, int interval_index) {
    if (!(t_lo < t_hi))
        throw Error("secular_solve: root bracket failure at interval " +
                    std::to_string(interval_index));
    const std::size_t m = delta.size();
    auto eval = [&](double t, double& g, double& dg) {
        g = -1.0;
        dg = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double d = t - delta[k];
            const double q = w[k] / d;
            g += coupling * q;
            dg -= coupling * q / d;
        }
    };
    double lo = t_lo, hi = t_hi;
    const double span = t_hi - t_lo;
    double t = 0.5 * (lo + hi);
    bool use_newton = false;
    for (int it = 0; it < 400; ++it) {
        double g, dg;
        eval(t, g, dg);
        if (g == 0.0) return t;
        if (g > 0.0)
            lo = t;   // decreasing f: root is above
        else
            hi = t;
        const double tol =
            1e-15 * span + 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
        if (hi - lo <= tol) break;
        double tn = 0.5 * (lo + hi);
        if (use_newton && dg != 0.0) {
            const double newton = t - g / dg;
            if (newton > lo && newton < hi) tn = newton;
        }
        use_newton = !use_newton;
        t = tn;
    }
    return 0.5 * (lo + hi);
}

struct LogProduct {
    double log_abs = 0.0;
    int negatives = 0;
    bool zero = false;

    void mul(double factor) {
        if (factor == 0.0) {
            zero = true;
            return;
        }
        if (factor < 0.0) {
            ++negatives;
            factor = -factor;
        }
        log_abs += std::log(factor);
    }
};

} // namespace

Eigen::VectorXd secular_solve(const Eigen::VectorXd& e, const Eigen::VectorXd& r,
                              double coupling) {
    check_inputs(e, r);
    if (coupling == 0.0) throw DomainError("secular_solve: coupling must be nonzero");
    if (coupling < 0.0) {
        // G = M - vv+ symmetry: negating the coupling mirrors the spectrum
        return reflect(secular_solve(reflect(e), r.reverse(), -coupling));
    }
    const Eigen::Index n = e.size();

    const double scale = std::max({std::abs(e[0]), std::abs(e[n - 1]), 1e-300});
    const double rmax = r.maxCoeff();
    const double weight_cut = kDeflationWeight * rmax;
    const double spacing_cut = kMergeSpacing * scale;

    // Deflate near-zero weights and merge near-degenerate poles: deflated
    // states keep their unperturbed eigenvalue exactly.
    std::vector<double> pole, weight;
    pole.reserve(n);
    weight.reserve(n);
    std::vector<double> out(static_cast<std::size_t>(n));
    std::vector<bool> deflated(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ri = std::max(r[i], 0.0);
        if (ri <= weight_cut) {
            deflated[i] = true;
            out[i] = e[i];
            continue;
        }
        if (!pole.empty() && e[i] - pole.back() < spacing_cut) {
            weight.back() += ri;   // merge into the previous kept pole
            deflated[i] = true;
            out[i] = e[i];
            continue;
        }
        pole.push_back(e[i]);
        weight.push_back(ri);
    }

    const std::size_t m = pole.size();
    if (m > 0) {
        const double total_weight = pairwise_sum(weight);
        std::vector<double> roots(m);
        std::vector<double> delta(m);
        for (std::size_t j = 0; j < m; ++j) {
            const bool last = (j + 1 == m);
            const double d_lo = pole[j];
            const double d_hi = last ? pole[j] + coupling * total_weight : pole[j + 1];
            // shift to the pole the root is closer to (midpoint sign test)
            std::size_t shift_idx = j;
            if (!last) {
                const double mid = 0.5 * (d_lo + d_hi);
                double g = -1.0;
                for (std::size_t k = 0; k < m; ++k) g += coupling * weight[k] / (mid - pole[k]);
                if (g >= 0.0) shift_idx = j + 1;   // root in the upper half
            }
            const double shift = pole[shift_idx];
            for (std::size_t k = 0; k < m; ++k) delta[k] = pole[k] - shift;
            const double gap = d_hi - d_lo;
            double t_lo, t_hi;
            if (shift_idx == j) {
                t_lo = 0.0;
                t_hi = last ? coupling * total_weight : gap;
            } else {
                t_lo = -gap;
                t_hi = 0.0;
            }
            double root_t = solve_on_bracket(delta, weight, coupling,
                                             std::nextafter(t_lo, t_hi),
                                             std::nextafter(t_hi, t_lo),
                                             static_cast<int>(j));
            double root = shift + root_t;
            // enforce exact interlacing on the stored doubles
            if (root <= d_lo) root = std::nextafter(d_lo, d_hi);
            if (!last && root >= d_hi) root = std::nextafter(d_hi, d_lo);
            roots[j] = root;
        }
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!deflated[i]) out[i] = roots[k++];
    }

    Eigen::VectorXd result = Eigen::Map<Eigen::VectorXd>(out.data(), n);
    std::sort(result.begin(), result.end());
    return result;
}

Eigen::VectorXd perturbed_weights(const Eigen::VectorXd& e, const Eigen::VectorXd& E,
                                  double coupling) {
    if (e.size() != E.size() || e.size() == 0)
        throw Error("perturbed_weights: e and E must be nonempty with equal length");
    if (coupling == 0.0) throw DomainError("perturbed_weights: coupling must be nonzero");
    const Eigen::Index n = e.size();
    Eigen::VectorXd z(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        LogProduct p;
        for (Eigen::Index g = 0; g < n; ++g) p.mul(E[a] - e[g]);
        if (p.zero) {
            z[a] = 0.0;   // deflated state: numerator vanishes
            continue;
        }
        LogProduct q;
        for (Eigen::Index g = 0; g < n; ++g)
            if (g != a) q.mul(E[a] - E[g]);
        if (q.zero)
            throw Error("perturbed_weights: repeated perturbed eigenvalue at index " +
                        std::to_string(a));
        int negatives = p.negatives + q.negatives + (coupling < 0.0 ? 1 : 0);
        const double mag = std::exp(p.log_abs - q.log_abs - std::log(std::abs(coupling)));
        const double value = (negatives % 2 == 0) ? mag : -mag;
        if (value < -1e-12)
            throw Error("perturbed_weights: negative weight (broken interlacing) at index " +
                        std::to_string(a));
        z[a] = std::max(value, 0.0);
    }
    return z;
}

OverlapData overlap_coefficients(const Eigen::VectorXd& e, const Eigen::VectorXd& E) {
    if (e.size() != E.size() || e.size() == 0)
        throw Error("overlap_coefficients: e and E must be nonempty with equal length");
    const Eigen::Index n = e.size();
    OverlapData od;
    od.a_sq.resize(n);
    od.b_sq.resize(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        // |b_a|^2 = prod_g (E_g - e_a) / prod_{g != a} (e_g - e_a)
        LogProduct pn, pd;
        for (Eigen::Index g = 0; g < n; ++g) pn.mul(E[g] - e[a]);
        for (Eigen::Index g = 0; g < n; ++g)
            if (g != a) pd.mul(e[g] - e[a]);
        if (pn.zero) {
            od.b_sq[a] = 0.0;
        } else if (pd.zero) {
            throw Error("overlap_coefficients: repeated unperturbed eigenvalue at index " +
                        std::to_string(a));
        } else {
            const int neg = pn.negatives + pd.negatives;
            const double mag = std::exp(pn.log_abs - pd.log_abs);
            const double v = (neg % 2 == 0) ? mag : -mag;
            if (v < -1e-12)
                throw Error("overlap_coefficients: negative |b|^2 (broken interlacing) at index " +
                            std::to_string(a));
            od.b_sq[a] = std::max(v, 0.0);
        }
        // |a_a|^2 = -prod_g (e_g - E_a) / prod_{g != a} (E_g - E_a)
        LogProduct qn, qd;
        for (Eigen::Index g = 0; g < n; ++g) qn.mul(e[g] - E[a]);
        for (Eigen::Index g = 0; g < n; ++g)
            if (g != a) qd.mul(E[g] - E[a]);
        if (qn.zero) {
            od.a_sq[a] = 0.0;
        } else if (qd.zero) {
            throw Error("overlap_coefficients: repeated perturbed eigenvalue at index " +
                        std::to_string(a));
        } else {
            const int neg = 1 + qn.negatives + qd.negatives;
            const double mag = std::exp(qn.log_abs - qd.log_abs);
            const double v = (neg % 2 == 0) ? mag : -mag;
            if (v < -1e-12)
                throw Error("overlap_coefficients: negative |a|^2 (broken interlacing) at index " +
                            std::to_string(a));
            od.a_sq[a] = std::max(v, 0.0);
        }
    }
    return od;
}

Eigen::MatrixXd overlap_matrix(const Eigen::VectorXd& e, const Eigen::VectorXd& E,
                               const OverlapData& overlaps) {
    const Eigen::Index n = e.size();
    if (E.size() != n || overlaps.a_sq.size() != n || overlaps.b_sq.size() != n)
        throw Error("overlap_matrix: inconsistent dimensions");
    if (n > 1024) throw Error("overlap_matrix: n > 1024 exceeds the dense-memory contract");
    Eigen::MatrixXd c(n, n);
    const Eigen::VectorXd a = overlaps.a_sq.cwiseSqrt();
    const Eigen::VectorXd b = overlaps.b_sq.cwiseSqrt();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (a[i] == 0.0) {
            // deflated state: eigenvector unchanged
            c.row(i).setZero();
            c(i, i) = 1.0;
            continue;
        }
        for (Eigen::Index j = 0; j < n; ++j)
            c(i, j) = b[j] == 0.0 ? 0.0 : a[i] * b[j] / (E[i] - e[j]);
    }
    return c;
}

TraceResiduals trace_identities(const Eigen::VectorXd& e, const Eigen::VectorXd& E,
                                const Eigen::VectorXd& z, double coupling) {
    const Eigen::Index n = e.size();
    if (E.size() != n || z.size() != n)
        throw Error("trace_identities: inconsistent dimensions");
    std::vector<double> diff(n), e2(n), big(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        diff[i] = E[i] - e[i];
        e2[i] = e[i] * e[i];
        big[i] = E[i] * E[i] - 2.0 * coupling * E[i] * z[i] - e[i] * e[i];
    }
    const double sum_diff = pairwise_sum(diff);
    const double sum_e2 = pairwise_sum(e2);
    TraceResiduals res;
    const double lin_num = std::abs(sum_diff - coupling);
    res.linear = lin_num == 0.0 ? 0.0 : lin_num / std::max(std::abs(coupling), 1e-300);
    const double quad_num = std::abs(pairwise_sum(big) + coupling * coupling);
    res.quadratic = quad_num == 0.0 ? 0.0 : quad_num / std::max(std::abs(sum_e2), 1e-300);
    return res;
}

Spectrum perturb(const Spectrum& s, double coupling) {
    if (coupling == 0.0) return s;
    Spectrum out;
    out.energies = secular_solve(s.energies, s.weights, coupling);
    out.weights = perturbed_weights(s.energies, out.energies, coupling);
    return out;
}

Eigen::VectorXd propagate_component(const Eigen::VectorXd& e, const Eigen::VectorXd& E,
                                    const Eigen::VectorXd& b_signed, const Eigen::VectorXd& phi) {
    const Eigen::Index n = e.size();
    if (E.size() != n || b_signed.size() != n || phi.size() != n)
        throw Error("propagate_component: inconsistent dimensions");
    const OverlapData od = overlap_coefficients(e, E);
    Eigen::VectorXd out(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        if (od.a_sq[a] == 0.0) {
            out[a] = phi[a];   // deflated: eigenvector untouched
            continue;
        }
        double s = 0.0;
        for (Eigen::Index g = 0; g < n; ++g) s += b_signed[g] * phi[g] / (E[a] - e[g]);
        out[a] = std::sqrt(od.a_sq[a]) * s;
    }
    return out;
}

} // namespace rmtk::rank_one
