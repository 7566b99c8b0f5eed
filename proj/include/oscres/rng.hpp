#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace oscres {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stable child-seed derivation: FNV-1a over the tag bytes mixed into the
// master seed. Adding new sweep cells or trials never perturbs the seeds of
// existing ones because each cell derives from its own tag string.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return splitmix64(master ^ h);
}

// Deterministic generator: mt19937_64 engine with hand-rolled distributions.
// std::uniform_int_distribution and friends are implementation-defined, so
// results would not be stable across standard libraries; these are.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [lo, hi], inclusive. Modulo rejection keeps the
    // draw unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1u;
        if (range == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit span
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return lo + static_cast<std::int64_t>(r % range);
    }

    // Box-Muller without a cached spare: exactly two uniforms per draw, so
    // the stream position is a pure function of the call count.
    double normal(double mean, double stddev) {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * mag * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace oscres
