#pragma once

// Deterministic random streams. Every stream is an mt19937_64 seeded from a
// splitmix64 fold of an integer key, so (seed, key...) always reproduces the
// same draws on every platform.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dscn {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> key) noexcept
{
    std::uint64_t h = splitmix64(seed);
    for (const auto k : key)
        h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

class random_stream {
public:
    explicit random_stream(std::uint64_t seed) : engine_(seed) {}
    random_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> key)
        : engine_(derive_seed(seed, key))
    {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n) noexcept
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace dscn
