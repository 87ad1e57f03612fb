#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace bandselect {

/// Deterministic random source. std::mt19937_64 is fully specified by the
/// standard, but the standard distributions are not; the draw helpers here
/// are spelled out so that identical seeds give identical streams on every
/// platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t bounded(std::uint64_t n) {
        // multiply-shift; bias is < 2^-64 per draw, irrelevant here
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double real01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Box-Muller normal draw.
    double normal(double mean, double stddev) {
        double u1 = real01();
        double u2 = real01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        return mean + stddev * radius * std::cos(two_pi * u2);
    }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace bandselect
