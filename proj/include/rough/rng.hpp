#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rough {

// SplitMix64 step; used only to derive well-separated engine seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Replicate-level seed derivation: replicate r of a Monte Carlo run draws
// from derive_seed(seed, r), so replicates are independent and individually
// reproducible regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(s);
}

// Deterministic RNG with keyed substreams. Two streams derived from the same
// user seed but different (stream, component) keys never share state, so
// changing one component's draws leaves the others bit-identical.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t component = 0) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s ^= 0x6a09e667f3bcc908ULL + stream;
        std::uint64_t b = splitmix64(s);
        s ^= 0xbb67ae8584caa73bULL + component;
        std::uint64_t c = splitmix64(s);
        return Rng(a ^ (b * 0x9e3779b97f4a7c15ULL) ^ (c << 1));
    }

    // Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Unit-rate exponential.
    double exponential() {
        return -std::log1p(-uniform());
    }

    // Standard normal (Box-Muller, cosine branch).
    double normal() {
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace rough
