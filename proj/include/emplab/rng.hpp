#pragma once

// Deterministic random source. All stochastic code in the library draws
// through this wrapper so that a fixed seed yields a bit-identical stream
// regardless of which standard library the project is built against
// (std::normal_distribution and friends are implementation-defined).

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace emplab {

// splitmix64, used to derive independent child seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix64(base ^ 0x6a09e667f3bcc908ULL);
    s = mix64(s ^ mix64(a));
    s = mix64(s ^ mix64(b));
    s = mix64(s ^ mix64(c));
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0,1), 53 mantissa bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], inclusive. Rejection keeps it unbiased.
    int uniform_int(int lo, int hi) {
        if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= limit);
        return lo + static_cast<int>(r % span);
    }

    // Standard normal via Box-Muller. The spare value is discarded so the
    // generator carries no hidden state between calls.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0,1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Poisson by sequential-search inversion of the cdf; exact for the
    // small means used here. Larger means are split into chunks of <= 25
    // (sums of independent Poissons are Poisson), so no normal
    // approximation is ever involved and exp(-lambda) never underflows.
    int poisson(double lambda) {
        if (lambda < 0.0) throw std::invalid_argument("poisson: negative mean");
        if (lambda == 0.0) return 0;
        int total = 0;
        while (lambda > 25.0) {
            total += poisson_inversion(25.0);
            lambda -= 25.0;
        }
        return total + poisson_inversion(lambda);
    }

private:
    int poisson_inversion(double lambda) {
        const double u = uniform();
        double p = std::exp(-lambda);
        double cum = p;
        int k = 0;
        // Hard stop far in the tail guards against u landing on the last ulp.
        const int k_max = static_cast<int>(lambda + 40.0 * std::sqrt(lambda) + 25.0);
        while (u >= cum && k < k_max) {
            ++k;
            p *= lambda / k;
            cum += p;
        }
        return k;
    }

    std::mt19937_64 gen_;
};

}  // namespace emplab
