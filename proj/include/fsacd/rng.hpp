#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fsacd {

/// Seeded random source built on std::mt19937_64, whose output sequence is
/// fixed by the standard, with hand-rolled distributions so that draws are
/// reproducible across standard-library implementations. uniform() and
/// uniform_int() are pure integer/bit manipulation; normal() uses Box-Muller
/// and therefore inherits the platform's log/cos rounding (at most 1-2 ulp).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n). Lemire's multiply-and-reject method.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Box-Muller transform, cosine branch only (one draw pair per normal).
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * 3.141592653589793238462643 * u2);
        return mean + stddev * z;
    }

    /// Independent stream derived from the original seed and a stream id.
    /// Splitting does not consume state, so split(k) is position-independent.
    Rng split(std::uint64_t stream) const {
        return Rng(splitmix64(seed_ + 0x9E3779B97F4A7C15ull * (stream + 1)));
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace fsacd
