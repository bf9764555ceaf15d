#ifndef RMTK_COMMON_HPP
#define RMTK_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmtk {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside an operation's validity region (kappa^2 <= 1 for the
// collective state, nonpositive l(E) denominator, empty window, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Fixed seed-splitting function: all per-realization (and per-purpose) RNG
// streams are derived from the master seed and a path of integer tags, so
// parallel and serial runs agree bit for bit.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = master;
    (void)splitmix64(h);
    for (std::uint64_t tag : path) {
        h ^= splitmix64(h) + 0x9E3779B97F4A7C15ULL + (tag << 6) + (tag >> 2) + tag;
        (void)splitmix64(h);
    }
    std::uint64_t s = h;
    return splitmix64(s);
}

// mt19937_64 with hand-rolled variate transforms.  The distributions in
// <random> are implementation-defined, so we do not use them: identical
// seeds must give identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform in (0,1]
    double uniform_pos() { return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; }

    // standard normal, Marsaglia polar method with cached spare
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    // Gamma(shape, 1), Marsaglia-Tsang; shapes < 1 via the boost identity
    double gamma(double shape) {
        if (!(shape > 0.0)) throw DomainError("gamma variate requires shape > 0");
        if (shape < 1.0) {
            const double u = uniform_pos();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Order-insensitive reduction used wherever samples may arrive from
// parallel workers: pairwise summation on an index range.
double pairwise_sum(std::span<const double> v);

// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware
// concurrency).  fn must only write to per-index slots; results are then
// independent of the schedule.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

} // namespace rmtk

#endif
