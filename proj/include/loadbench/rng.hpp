#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace loadbench {

/// Deterministic 64-bit RNG (splitmix64). All randomized code in the
/// library draws from this generator so that results are reproducible
/// across platforms, standard libraries and thread counts.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection-free modulo is fine here; n is tiny vs 2^64
        return n == 0 ? 0 : next_u64() % n;
    }

    /// Standard normal via Box-Muller (non-cached variant for determinism).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Fisher-Yates shuffle of an index vector.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derive an independent stream, e.g. one per forest tree. Mixing the
    /// stream id through the generator keeps streams decorrelated while the
    /// mapping (seed, id) -> stream stays fixed.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        Rng mixer(seed ^ (0x6a09e667f3bcc909ull + stream_id * 0x9e3779b97f4a7c15ull));
        return Rng(mixer.next_u64());
    }

private:
    std::uint64_t state_;
};

} // namespace loadbench
