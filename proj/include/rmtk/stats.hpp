#ifndef RMTK_STATS_HPP
#define RMTK_STATS_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"
#include "rmtk/ensembles.hpp"

namespace rmtk::stats {

using ensembles::Spectrum;

struct EnergyWindow {
    double lo;
    double hi;
};

// What window_select collects per selected state:
//   width          x = N z
//   amplitude      +- sqrt(N z), sign gauge drawn from a seeded stream (beta=1)
//   amplitude_real sqrt(2 N z) cos(theta) with a seeded uniform phase gauge (beta=2)
//   amplitude_imag sqrt(2 N z) sin(theta), same phase draw
// Both amplitude scalings make the Gaussian variance of the samples equal
// l(E).  The sign/phase of the first eigenvector component is pure gauge,
// so it is synthesized explicitly; squaring amplitudes recovers the widths
// ((re^2+im^2)/2 for beta=2).
enum class Scale { width, amplitude, amplitude_real, amplitude_imag };

struct SelectOptions {
    bool exclude_top_state = false;   // drop the highest state (collective, Z>0)
    std::uint64_t gauge_seed = 0;     // stream for synthesized signs/phases
};

struct SampleSet {
    std::vector<double> values;
    nlohmann::json provenance;
    std::size_t count() const { return values.size(); }
    bool empty() const { return values.empty(); }
};

SampleSet window_select(std::span<const Spectrum> spectra, const EnergyWindow& w,
                        Scale scale, const SelectOptions& opt = {});

struct MomentEstimate {
    double value;
    double std_error;
};

MomentEstimate empirical_moment(const SampleSet& s, double q);

struct GaussianFit {
    double mean;
    double variance;            // maximum-likelihood (1/n)
    double variance_std_error;  // variance * sqrt(2/(n-1))
    std::size_t count;
};

GaussianFit gaussian_fit(const SampleSet& s);

struct KsResult {
    double statistic;   // two-sided sup distance
    double p_value;     // asymptotic (Kolmogorov distribution)
};

KsResult ks_statistic(const SampleSet& s, const std::function<double(double)>& cdf);
KsResult ks_statistic(std::span<const double> values, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct Histogram {
    std::vector<double> bin_lo;
    std::vector<double> bin_hi;
    std::vector<double> density;   // area-normalized to 1
};

Histogram histogram(const SampleSet& s, int bins, double lo, double hi);
int freedman_diaconis_bins(const SampleSet& s, double lo, double hi);

// Deterministic subsample without replacement (seeded Fisher-Yates prefix);
// returns all values when k >= count.
std::vector<double> subsample(std::span<const double> values, std::size_t k, std::uint64_t seed);

} // namespace rmtk::stats

#endif
