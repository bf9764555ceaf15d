#include "rmtk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rmtk/special.hpp"

namespace rmtk::stats {

namespace {

double ks_p_value(double d, double n_eff) {
    const double sn = std::sqrt(n_eff);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    return special::kolmogorov_q(lambda);
}

} // namespace

SampleSet window_select(std::span<const Spectrum> spectra, const EnergyWindow& w,
                        Scale scale, const SelectOptions& opt) {
    if (spectra.empty()) throw Error("window_select: empty spectrum collection");
    if (!(w.lo < w.hi)) throw DomainError("window_select: window requires lo < hi");
    SampleSet out;
    Rng gauge(opt.gauge_seed);
    std::size_t excluded = 0;
    for (const Spectrum& sp : spectra) {
        const Eigen::Index n = sp.size();
        const double nn = static_cast<double>(n);
        const Eigen::Index top = n - 1;   // highest state (collective when Z > 0)
        for (Eigen::Index i = 0; i < n; ++i) {
            if (opt.exclude_top_state && i == top) {
                if (sp.energies[i] > w.lo && sp.energies[i] < w.hi) ++excluded;
                continue;
            }
            const double E = sp.energies[i];
            if (!(E > w.lo && E < w.hi)) continue;
            const double width = nn * sp.weights[i];
            switch (scale) {
                case Scale::width:
                    out.values.push_back(width);
                    break;
                case Scale::amplitude: {
                    // sign of the first component is gauge; drawn from the
                    // seeded stream so the histogram is symmetric
                    const double sign = gauge.uniform() < 0.5 ? -1.0 : 1.0;
                    out.values.push_back(sign * std::sqrt(width));
                    break;
                }
                case Scale::amplitude_real:
                case Scale::amplitude_imag: {
                    // uniform phase gauge; sqrt(2N z) cos/sin so the Gaussian
                    // variance of each part equals l(E)
                    const double theta = 2.0 * std::numbers::pi * gauge.uniform();
                    const double amp = std::sqrt(2.0 * width);
                    out.values.push_back(scale == Scale::amplitude_real
                                             ? amp * std::cos(theta)
                                             : amp * std::sin(theta));
                    break;
                }
            }
        }
    }
    out.provenance = {{"window", {w.lo, w.hi}},
                      {"scale", static_cast<int>(scale)},
                      {"realizations", spectra.size()},
                      {"selected", out.values.size()},
                      {"excluded_top_states", excluded},
                      {"empty", out.values.empty()}};
    return out;
}

MomentEstimate empirical_moment(const SampleSet& s, double q) {
    if (s.count() < 2) throw Error("empirical_moment: needs at least 2 samples");
    if (q == 0.0) return {1.0, 0.0};
    const double n = static_cast<double>(s.count());
    std::vector<double> pow_q(s.count()), pow_2q(s.count());
    for (std::size_t i = 0; i < s.count(); ++i) {
        const double v = std::pow(s.values[i], q);
        pow_q[i] = v;
        pow_2q[i] = v * v;
    }
    const double mean = pairwise_sum(pow_q) / n;
    const double mean2 = pairwise_sum(pow_2q) / n;
    const double var = std::max(0.0, mean2 - mean * mean);
    return {mean, std::sqrt(var / (n - 1.0))};
}

GaussianFit gaussian_fit(const SampleSet& s) {
    if (s.count() < 10) throw Error("gaussian_fit: needs at least 10 samples");
    const double n = static_cast<double>(s.count());
    const double mean = pairwise_sum(s.values) / n;
    std::vector<double> sq(s.count());
    for (std::size_t i = 0; i < s.count(); ++i) {
        const double d = s.values[i] - mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / n;   // maximum likelihood
    if (!(var > 0.0)) throw Error("gaussian_fit: degenerate (zero variance) sample");
    GaussianFit fit;
    fit.mean = mean;
    fit.variance = var;
    fit.variance_std_error = var * std::sqrt(2.0 / (n - 1.0));
    fit.count = s.count();
    return fit;
}

KsResult ks_statistic(std::span<const double> values, const std::function<double(double)>& cdf) {
    if (values.size() < 10) throw Error("ks_statistic: needs at least 10 samples");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, std::max((i + 1) / n - f, f - i / n));
    }
    return {d, ks_p_value(d, n)};
}

KsResult ks_statistic(const SampleSet& s, const std::function<double(double)>& cdf) {
    return ks_statistic(std::span<const double>(s.values), cdf);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 10 || b.size() < 10) throw Error("ks_two_sample: needs at least 10 samples each");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i] <= y[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double n_eff = na * nb / (na + nb);
    return {d, ks_p_value(d, n_eff)};
}

Histogram histogram(const SampleSet& s, int bins, double lo, double hi) {
    if (bins < 1) throw Error("histogram: needs at least one bin");
    if (!(lo < hi)) throw Error("histogram: requires lo < hi");
    Histogram h;
    h.bin_lo.resize(bins);
    h.bin_hi.resize(bins);
    std::vector<std::size_t> counts(bins, 0);
    const double width = (hi - lo) / bins;
    std::size_t in_range = 0;
    for (double v : s.values) {
        if (v < lo || v >= hi) continue;
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= static_cast<std::size_t>(bins)) b = bins - 1;
        ++counts[b];
        ++in_range;
    }
    if (in_range == 0) throw Error("histogram: no samples in range");
    h.density.resize(bins);
    for (int b = 0; b < bins; ++b) {
        h.bin_lo[b] = lo + b * width;
        h.bin_hi[b] = lo + (b + 1) * width;
        // normalized over the covered range: area is exactly 1
        h.density[b] = static_cast<double>(counts[b]) / (static_cast<double>(in_range) * width);
    }
    return h;
}

int freedman_diaconis_bins(const SampleSet& s, double lo, double hi) {
    if (s.count() < 2) return 1;
    std::vector<double> sorted(s.values);
    std::sort(sorted.begin(), sorted.end());
    const auto at = [&](double p) {
        const double idx = p * (sorted.size() - 1);
        const auto i = static_cast<std::size_t>(idx);
        const double frac = idx - static_cast<double>(i);
        return i + 1 < sorted.size() ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
                                     : sorted[i];
    };
    const double iqr = at(0.75) - at(0.25);
    const double n13 = std::cbrt(static_cast<double>(s.count()));
    double width = 2.0 * iqr / n13;
    if (!(width > 0.0)) width = (hi - lo) / std::max(1.0, std::sqrt(static_cast<double>(s.count())));
    const int bins = static_cast<int>(std::ceil((hi - lo) / width));
    return std::clamp(bins, 1, 10000);
}

std::vector<double> subsample(std::span<const double> values, std::size_t k, std::uint64_t seed) {
    std::vector<double> v(values.begin(), values.end());
    if (k >= v.size()) return v;
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (v.size() - i));
        std::swap(v[i], v[j]);
    }
    v.resize(k);
    return v;
}

} // namespace rmtk::stats
