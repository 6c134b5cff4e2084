#pragma once

// Counter-derived random streams. A stream is a pure function of
// (master_seed, path...), so any trial can be regenerated in isolation and the
// result of a Monte Carlo run does not depend on how trials are scheduled.

#include <cstdint>
#include <initializer_list>
#include <random>

#include "cpdsss/types.hpp"

namespace cpdsss {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Mixes a path of indices into one 64-bit key.
constexpr std::uint64_t derive_key(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t k = splitmix64(master);
    for (auto p : path) k = splitmix64(k ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    return k;
}

class RngStream {
public:
    explicit RngStream(std::uint64_t key) : engine_(key) {}
    RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> path) : engine_(derive_key(master, path)) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    // Circular-symmetric complex Gaussian with E|w|^2 = variance.
    cdouble complex_normal(double variance);
    // +1 or -1 with equal probability.
    int sign() { return (engine_() >> 63) ? 1 : -1; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline cdouble RngStream::complex_normal(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

}  // namespace cpdsss
