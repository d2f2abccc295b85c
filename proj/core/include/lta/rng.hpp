#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lta {

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed for a named unit of work (e.g. one code).
/// Workers seeded this way reproduce the sequential reference output when run
/// in parallel.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view name) {
    return splitmix64(base_seed ^ fnv1a64(name));
}

/// Seeded generator with platform-independent bounded draws. mt19937_64 output
/// is pinned by the standard; the rejection loop below avoids the
/// implementation-defined behavior of std::uniform_int_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Unbiased uniform draw from [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t m = n;
        const std::uint64_t threshold = (0 - m) % m;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold) return static_cast<std::size_t>(r % m);
        }
    }

    /// Uniform double in [0, 1). Used for jitter only; not part of any
    /// reproducibility contract.
    double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace lta
