#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace ptgrad {

// splitmix64; used only to derive well-separated seeds for named streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. All transforms are implemented explicitly
/// (no std distributions) so that output sequences depend only on the seed,
/// not on the standard library in use.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Derives an independent stream from a base seed and a stream id.
    /// Streams are pre-assigned to chains so results are schedule-independent.
    static Rng stream(std::uint64_t base_seed, std::uint64_t stream_id) {
        std::uint64_t s = base_seed ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1));
        std::uint64_t a = splitmix64(s);
        std::uint64_t b = splitmix64(s);
        return Rng(a ^ (b << 1));
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller. Stateless: always consumes exactly
    /// two engine draws per call.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform index in {0, ..., n-1}.
    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: n must be positive");
        return static_cast<std::size_t>(eng_() % n);
    }

    /// Uniform index in {0, ..., n-1} \ {excl}.
    std::size_t index_excluding(std::size_t n, std::size_t excl) {
        if (n < 2) throw std::invalid_argument("Rng::index_excluding: n must be >= 2");
        std::size_t k = index(n - 1);
        return k + (k >= excl ? 1 : 0);
    }

    /// Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = index(i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace ptgrad
