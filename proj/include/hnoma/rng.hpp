#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace hnoma {

// Counter-based pseudo-random stream (SplitMix64).  The generator state is a
// plain 64-bit counter advanced by a fixed odd increment, with the output run
// through an avalanching finaliser, so independent streams can be derived for
// any (seed, path) tuple without coordination.  Results do not depend on how
// work is scheduled across threads, which keeps Monte-Carlo runs bit-exact for
// any worker count.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    // Derives a stream from a root seed and a tuple of path components
    // (e.g. {snr index, trial, purpose, group, user}).  Distinct paths give
    // statistically independent streams.
    static RandomStream derive(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = mix(root + kGamma);
        for (std::uint64_t component : path) {
            h = mix(h ^ mix(component + kGamma));
        }
        return RandomStream(h);
    }

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; consumes exactly two uniforms per pair.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_unit(); // (0, 1], keeps log finite
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly symmetric complex Gaussian with E|x|^2 = variance.
    std::complex<double> next_cgaussian(double variance) {
        const double s = std::sqrt(variance / 2.0);
        const double re = next_gaussian();
        const double im = next_gaussian();
        return {s * re, s * im};
    }

    // Uniform integer in [0, bound); bound must be a power of two so the
    // mapping is exactly unbiased.
    std::uint32_t next_pow2(std::uint32_t bound) {
        return static_cast<std::uint32_t>(next_u64() & (static_cast<std::uint64_t>(bound) - 1));
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace hnoma
