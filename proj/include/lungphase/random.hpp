#pragma once

#include <cstdint>
#include <random>

namespace lungphase {

// splitmix64 finalizer; used to derive independent, schedule-free streams.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Counter-based seed derivation: the stream for (seed, a, b) is fixed no
// matter which thread or in which order it is consumed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

// Thin wrapper over mt19937_64 whose derived draws are implemented here
// rather than via <random> distributions, so values are identical across
// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform01();                       // [0, 1), 53-bit resolution
    double uniform(double lo, double hi);     // [lo, hi)
    std::uint64_t below(std::uint64_t bound); // [0, bound), unbiased
    double normal();                          // standard normal, Box-Muller

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lungphase
