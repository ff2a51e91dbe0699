#pragma once

#include <cstdint>
#include <random>

#include "oneshot/matrix.hpp"

namespace oneshot {

/// Deterministic random source. Gaussian variates are produced by an explicit
/// Box-Muller transform on raw mt19937_64 output so that streams are identical
/// across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    double uniform01() {
        // 53-bit mantissa in [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t raw() { return gen_(); }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    complexd complex_gaussian() { return {gaussian(), gaussian()}; }

    /// Decorrelated child seed via splitmix64 of (seed, index); reproducible
    /// independently of worker scheduling.
    std::uint64_t child_seed(std::uint64_t index) const {
        std::uint64_t z = seed_ + (index + 1) * 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    Rng child(std::uint64_t index) const { return Rng(child_seed(index)); }

  private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace oneshot
