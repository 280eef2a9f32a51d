// rng.hpp — counter-based random streams.
//
// Every random quantity in the toolkit is a pure function of a 64-bit
// master seed and integer labels (stream id, path, step, mode).  That makes
// parallel and serial generation bit-identical and lets refinement /
// verification sub-checks own independent streams derived from one seed.

#pragma once

#include <cstdint>
#include <cmath>

namespace seeopt::rng {

/// Fixed stream labels so independent consumers never collide.
enum class Stream : std::uint64_t {
    wiener          = 0x5731,
    refine          = 0x5247,
    control_sample  = 0x4353,
    alt_control     = 0x414C,
    verify_phi      = 0x5650,
    verify_ham      = 0x5648,
    verify_min      = 0x564D,
    verify_bounds   = 0x5642,
    finite_diff     = 0x4644,
    cost_compare    = 0x4343,
    minimizer       = 0x4D5A,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Key for the (a, b, c) cell of a labelled stream.  Chained splitmix64
/// rounds; each label perturbs the state before the next round.
inline std::uint64_t derive_key(std::uint64_t seed, Stream stream,
                                std::uint64_t a = 0, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(seed ^ static_cast<std::uint64_t>(stream));
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

/// Maps a 64-bit word to (0, 1]: the top 53 bits plus one, scaled by 2^-53.
inline double to_unit_open0(std::uint64_t x) {
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

/// Maps a 64-bit word to [0, 1).
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Standard normal deviate keyed by `key` (Box-Muller, one draw per key).
inline double standard_normal(std::uint64_t key) {
    const double u1 = to_unit_open0(splitmix64(key));
    const double u2 = to_unit(splitmix64(key ^ 0xD1B54A32D192ED03ULL));
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

/// Small sequential generator for sampling loops whose draw count is not
/// known in advance.  Still a pure function of its seed key.
class StreamRng {
public:
    explicit StreamRng(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1).
    double uniform() { return to_unit(next_u64()); }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal (Box-Muller on two sequential uniforms).
    double normal() {
        const double u1 = to_unit_open0(next_u64());
        const double u2 = to_unit(next_u64());
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

} // namespace seeopt::rng
