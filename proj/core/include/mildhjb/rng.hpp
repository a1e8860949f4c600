#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace mildhjb {

// Counter-based generator: every variate is a pure function of (key, counter),
// so parallel consumers keyed by (seed, stream index) are reproducible and
// order-independent.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(mix(seed, 0x9e3779b97f4a7c15ull), stream)) {}

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Stable sub-seed derivation from a component name.
    static std::uint64_t derive(std::uint64_t seed, std::string_view name) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (char c : name) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
        return mix(seed, h);
    }

    // Uniform in (0, 1).
    double uniform(std::uint64_t counter) const {
        const std::uint64_t bits = mix(key_, counter);
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller on counters (2c, 2c+1).
    double normal(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t key_;
};

}  // namespace mildhjb
