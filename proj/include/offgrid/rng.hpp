#ifndef OFFGRID_RNG_HPP
#define OFFGRID_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace offgrid {

/// Thin wrapper over mt19937_64 with fixed draw algorithms, so that seeded
/// results do not depend on the standard library's distribution details.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound).
    std::uint64_t uniform_int(std::uint64_t bound) { return engine_() % bound; }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform();
        while (u == 0.0) u = uniform();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 2.0 * std::numbers::pi * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace offgrid

#endif  // OFFGRID_RNG_HPP
