#pragma once

#include <cstdint>
#include <random>

namespace hsmf {

// splitmix64 finalizer; used to derive independent per-task streams from a
// single user seed so parallel evaluation order never changes results.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task) noexcept {
    return mix64(mix64(seed) ^ mix64(task + 0x632BE59BD9B4E019ULL));
}

// mt19937_64 has a standard-mandated output sequence; the double conversion
// below is done by hand so results are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace hsmf
