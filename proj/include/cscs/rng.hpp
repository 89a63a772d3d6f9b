#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cscs {

// SplitMix64 step; used both as a generator seeder and as a cheap stable hash.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives a stream seed from a master seed and a small tuple of indices, so that
// parallel trials draw from disjoint deterministic streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(master ^ 0x243f6a8885a308d3ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ (b + 0x13198a2e03707344ULL));
    s = splitmix64(s ^ (c + 0xa4093822299f31d0ULL));
    return s;
}

// Seeded generator with the handful of variate kinds the library needs. Normal
// sampling is an explicit Box-Muller so streams do not depend on the standard
// library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on (0,1); never returns 0 or 1
    double u01() {
        const double u = (next_u64() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(u01()));
        const double t = 6.283185307179586476925286766559 * u01();
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    double exponential(double rate) { return -std::log(u01()) / rate; }

    // Knuth product method; fine for the small per-slot means this project uses.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 30.0) {
            const double limit = std::exp(-mean);
            int k = 0;
            double p = u01();
            while (p > limit) {
                ++k;
                p *= u01();
            }
            return k;
        }
        // split large means to keep the product method in range
        const int half = poisson(mean / 2.0);
        return half + poisson(mean - mean / 2.0);
    }

    // index in [0,n) with probabilities proportional to weights[i]
    int discrete(const double* weights, int n) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += weights[i];
        double x = u01() * total;
        for (int i = 0; i < n; ++i) {
            x -= weights[i];
            if (x <= 0.0) return i;
        }
        return n - 1;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace cscs
