#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "seisuno/tensor.hpp"

namespace seisuno::rng {

// One round of splitmix64. Used to derive well-separated child seeds from a
// master seed plus arbitrary tags, so that independent pipeline stages never
// share a stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {
inline std::uint64_t to_u64(std::uint64_t v) { return v; }
inline std::uint64_t to_u64(std::string_view v) { return hash_tag(v); }
inline std::uint64_t to_u64(const char* v) { return hash_tag(v); }
}  // namespace detail

template <class... Tags>
std::uint64_t derive_seed(std::uint64_t base, Tags&&... tags) {
    std::uint64_t state = base;
    (void)splitmix64(state);
    ((state ^= detail::to_u64(tags), (void)splitmix64(state)), ...);
    return state;
}

// Deterministic random stream. Wraps mt19937_64 (whose output sequence is
// pinned by the standard) and implements the variate transforms by hand:
// std::normal_distribution and friends are allowed to differ between standard
// library implementations, which would break byte-for-byte reproducibility.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform in [0, bound) by masked rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        check(bound > 0, "uniform_below: bound must be positive");
        if ((bound & (bound - 1)) == 0) return engine_() & (bound - 1);
        const std::uint64_t mask = std::numeric_limits<std::uint64_t>::max() >> std::countl_zero(bound - 1);
        for (;;) {
            const std::uint64_t v = engine_() & mask;
            if (v < bound) return v;
        }
    }

    // Uniform integer in [lo, hi], both ends inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        check(lo <= hi, "uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
        if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<std::int64_t>(engine_());
        return lo + static_cast<std::int64_t>(uniform_below(span + 1));
    }

    // Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Normal rejection-truncated to values strictly above `lo`.
    double normal_above(double mean, double sd, double lo) {
        for (;;) {
            const double v = normal(mean, sd);
            if (v > lo) return v;
        }
    }

    // Fisher-Yates with the pinned integer draw, so permutations are
    // reproducible across platforms (std::shuffle is not).
    template <class T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i + 1));
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace seisuno::rng
