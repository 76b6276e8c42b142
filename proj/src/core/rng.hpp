#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dpdglm {

// Deterministic random source for the simulation harness. Distribution
// transforms are implemented here so that a seed pins the byte-exact stream
// regardless of standard-library internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for one replicate of a seeded experiment.
  static Rng for_replicate(std::uint64_t seed, std::uint64_t replicate) {
    return Rng(mix(seed ^ mix(replicate + 1)));
  }

  double uniform() {
    // 53-bit mantissa in [0, 1)
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Knuth's product method; means in this project stay far below the point
  // where it degrades.
  int poisson(double mean) {
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = 1.0;
    do {
      ++k;
      prod *= uniform();
    } while (prod > limit);
    return k - 1;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dpdglm
