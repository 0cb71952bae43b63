#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace evtaxi {

// All stochastic draws in a scenario come from streams derived from the
// scenario seed, so runs are bit-reproducible. Distributions are sampled
// by hand (not std::*_distribution) to keep results identical across
// standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    // Independent stream for a named purpose under one scenario seed.
    static Rng stream(std::uint64_t seed, std::string_view name) {
        return Rng(splitmix64(seed ^ fnv1a64(name)));
    }

    std::uint64_t next() { return eng_(); }

    // Uniform in [0, 1) from the top 53 bits.
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    // Box-Muller; always consumes exactly two uniforms.
    double normal(double mean, double sd) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + sd * z;
    }

    double truncated_normal(double mean, double sd, double lo, double hi) {
        for (int i = 0; i < 1000; ++i) {
            double v = normal(mean, sd);
            if (v >= lo && v <= hi) return v;
        }
        return (lo + hi) / 2.0;  // pathological bounds; keep the run alive
    }

    double exponential(double rate) {
        double u = uniform01();
        return -std::log1p(-u) / rate;
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace evtaxi
