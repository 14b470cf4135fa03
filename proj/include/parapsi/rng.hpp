#pragma once

// Seeded RNG with self-contained uniform/normal transforms. The standard pins
// std::mt19937_64's output exactly but leaves the distributions implementation-
// defined; doing the transforms here keeps report bytes identical for identical
// (config, seed) across toolchains.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace parapsi {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double normal() {  // Box-Muller
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace parapsi
