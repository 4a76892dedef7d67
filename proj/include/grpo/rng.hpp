#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace grpo {

/// Seedable generator used for every random decision in the library.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the standard.
/// The conversions to doubles and bounded integers are done here rather than
/// through std:: distributions (whose algorithms are implementation-defined),
/// so a given seed yields the same stream on every conforming toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in {0, ..., n-1}; n must be positive.
    std::size_t index(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        // Reject the tail so that every residue is equally likely.
        const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % bound + 1) % bound;
        std::uint64_t draw = engine_();
        while (draw > limit) draw = engine_();
        return static_cast<std::size_t>(draw % bound);
    }

    bool coin() { return (engine_() >> 63) != 0; }

    /// Seed for an independent sub-stream, derived with splitmix64 so nearby
    /// (seed, stream) pairs do not produce correlated engines.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace grpo
