#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "mvlab/core.hpp"

namespace mvlab {

// Counter-based Gaussian noise: the draw for (particle, step, component) is a
// pure function of the seed and the counters, so results are independent of
// evaluation order and thread count.
class NoiseStream {
  public:
    explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Standard normal draw, N(0, 1).
    double normal(std::uint64_t particle, std::uint64_t step, std::uint64_t component) const {
        double u1 = uniform(particle, step, 2 * component);
        double u2 = uniform(particle, step, 2 * component + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform draw in (0, 1].
    double uniform(std::uint64_t particle, std::uint64_t step, std::uint64_t counter) const {
        std::uint64_t h = mix(seed_, particle, step, counter);
        return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
    }

    // Derive an unrelated stream (nested estimators, replicate batches).
    NoiseStream substream(std::uint64_t tag) const {
        return NoiseStream(splitmix(seed_ ^ (0x9e3779b97f4a7c15ULL + tag)));
    }

  private:
    static std::uint64_t splitmix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
        std::uint64_t h = splitmix(a);
        h = splitmix(h ^ b);
        h = splitmix(h ^ c);
        h = splitmix(h ^ d);
        return h;
    }

    std::uint64_t seed_;
};

}  // namespace mvlab
