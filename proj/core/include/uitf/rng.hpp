#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace uitf {

/// Deterministic 64-bit generator (splitmix64). Fixtures and toy-layer weights
/// must reproduce bit-for-bit from a seed, so this deliberately avoids
/// std::normal_distribution, whose output is implementation-defined.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of mantissa.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller; one value per call, pair cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log stays finite.
        double u1 = 1.0 - next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// FNV-1a 64-bit hash, used to pin fixture bytes in golden files.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace uitf
