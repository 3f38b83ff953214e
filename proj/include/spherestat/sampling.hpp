#pragma once

#include <cstdint>
#include <vector>

// Reproducible sampling shared by every seeded operation.
//
// Generator: SplitMix64. state += 0x9E3779B97F4A7C15; z = state;
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//   output z ^ (z >> 31). The initial state is the seed.
// Bounded integers: rejection on the top of the 64-bit range, then modulo.
// k-of-n samples: Floyd's algorithm over j = n-k .. n-1, returned sorted.
namespace spherestat {

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// Uniform integer in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal deviate (Box-Muller, no caching).
    double normal();

  private:
    std::uint64_t state_;
};

/// Simple random sample without replacement of k distinct values from
/// {1, ..., n}, sorted ascending.
std::vector<std::int64_t> sampleWithoutReplacement(std::int64_t n, std::int64_t k, std::uint64_t seed);

} // namespace spherestat
