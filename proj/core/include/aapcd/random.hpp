#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aapcd {

/// Seeded generator with platform-stable draws. std::mt19937_64 is fully
/// specified by the standard; the distribution helpers below avoid the
/// implementation-defined std:: distributions so traces reproduce bit-exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Multiply-shift; bias is below 2^-64 * n.
    std::size_t index(std::size_t n)
    {
        __extension__ using u128 = unsigned __int128;
        const auto wide = static_cast<u128>(engine_()) * n;
        return static_cast<std::size_t>(wide >> 64);
    }

    /// Standard normal by Box-Muller.
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace aapcd
