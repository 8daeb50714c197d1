#ifndef CTMLE_RNG_HPP
#define CTMLE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace ctmle {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based 64-bit generator (SplitMix64 stream). Output i is a pure
/// function of (seed, stream, i), so trial r is reproducible independently of
/// thread scheduling: give each trial its own stream.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ULL))) {}

    std::uint64_t next_u64() { return mix64(base_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

    /// Uniform in the open interval (0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

    /// Standard normal via Box-Muller (second draw cached).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

} // namespace ctmle

#endif
