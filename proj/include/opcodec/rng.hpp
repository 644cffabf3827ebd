#pragma once

#include <cstdint>
#include <random>

namespace opcodec {

/// SplitMix64 step. Used to derive well-separated per-stream seeds from a
/// single user seed (one stream per phantom image, per test operator, ...).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

/// Uniform double in [0, 1) built from the top 53 bits of the generator
/// output. std::uniform_real_distribution is not pinned by the standard, so
/// it is avoided everywhere reproducibility across platforms matters.
inline double uniform_double(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
    return lo + uniform_double(gen) * (hi - lo);
}

/// Standard normal deviate via the polar (Marsaglia) method.
inline double normal_double(std::mt19937_64& gen) {
    for (;;) {
        const double u = 2.0 * uniform_double(gen) - 1.0;
        const double v = 2.0 * uniform_double(gen) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0)
            return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

}  // namespace opcodec
