#pragma once

// Counter-based random streams. Stream (seed, index) is a pure function of its
// key, so trial i sees the same numbers no matter which worker runs it.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace ajscc {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// SplitMix64 sequence keyed by (seed, stream index). Satisfies
/// UniformRandomBitGenerator.
class CounterStream {
public:
    using result_type = std::uint64_t;

    constexpr CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(detail::mix64(seed ^ detail::mix64(stream + detail::kGolden))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Uniform double in [0, 1) with 53 random bits.
template <class Gen>
double uniform01(Gen& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Standard normal by Box-Muller; always consumes exactly two draws so that
/// streams stay aligned across configurations (common random numbers).
template <class Gen>
double standard_normal(Gen& g) {
    const double u1 = (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ajscc
