#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace agelab {

// Deterministic random source. The mt19937 engine is pinned by the standard,
// and all distributions are derived here by hand, so a given seed produces
// the same stream on every platform and compiler.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(static_cast<std::uint32_t>(seed ^ (seed >> 32))) {}

    std::uint32_t next_u32() { return eng_(); }

    // Uniform in [0, 1) with 24 random mantissa bits.
    float uniform01() { return static_cast<float>(next_u32() >> 8) * 0x1p-24f; }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01d() {
        const std::uint64_t hi = next_u32() >> 5;  // 27 bits
        const std::uint64_t lo = next_u32() >> 6;  // 26 bits
        return static_cast<double>((hi << 26) | lo) * 0x1p-53;
    }

    float uniform(float lo, float hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01d();
        while (u1 <= 0.0) u1 = uniform01d();
        const double u2 = uniform01d();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint32_t below(std::uint32_t n) {
        if (n <= 1) return 0;
        const std::uint32_t limit = UINT32_MAX - UINT32_MAX % n;
        std::uint32_t v = next_u32();
        while (v >= limit) v = next_u32();
        return v % n;
    }

    // Fisher-Yates shuffle using our own bounded draw.
    template <class V>
    void shuffle(V& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = below(static_cast<std::uint32_t>(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

    // Derives an independent stream seed from a base seed and an index
    // (splitmix64 finalizer).
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace agelab
