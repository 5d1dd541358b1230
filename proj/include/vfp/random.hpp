#pragma once
// Counter-based random numbers: every variate is a pure function of
// (seed, stream, counter), so ensembles reproduce bit for bit regardless
// of how work is scheduled.  The generator chains the SplitMix64 finalizer
// over the three words; normals are single Box-Muller cosine branches.

#include <cmath>
#include <cstdint>

namespace vfp {

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform on (0, 1]; never returns 0, so logs are safe.
    double uniform(std::uint64_t stream, std::uint64_t counter) const {
        const std::uint64_t bits = hash(stream, counter);
        return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal; one variate per (stream, counter) pair.
    double normal(std::uint64_t stream, std::uint64_t counter) const {
        const double u1 = uniform(stream, 2 * counter);
        const double u2 = uniform(stream, 2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t hash(std::uint64_t stream, std::uint64_t counter) const {
        return mix(mix(mix(seed_) ^ (stream + 0xD1B54A32D192ED03ULL)) ^
                   (counter + 0x8BB84B93962EACC9ULL));
    }

    std::uint64_t seed_;
};

}  // namespace vfp
