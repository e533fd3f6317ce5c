#ifndef BLQ_RNG_HPP
#define BLQ_RNG_HPP

#include <cstdint>

namespace blq {

/// SplitMix64 stream. Chosen over std::mt19937 because its output is
/// pinned by these few lines and therefore identical on every platform,
/// which the reproducibility contract for fixture data depends on.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + next_unit() * (hi - lo);
    }

    /// Uniform integer in [0, n). n must be > 0; modulo bias is irrelevant
    /// at the n << 2^64 sizes used here.
    std::uint64_t next_below(std::uint64_t n) {
        return next_u64() % n;
    }

private:
    std::uint64_t state_;
};

} // namespace blq

#endif // BLQ_RNG_HPP
