#pragma once

#include <cstdint>
#include <random>

namespace dp {

// Deterministic randomness stream with cheap independent substreams.
// All stochastic code in the library draws through this class so that a run
// is reproducible from a single root seed, and so that per-trial substreams
// (split by trial index) are identical no matter how trials are scheduled.
class RandomnessSource {
 public:
  explicit RandomnessSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform draw strictly inside (0, 1); safe as input to inverse CDFs.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unbiased uniform index in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t reject_below = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= reject_below) return r % n;
    }
  }

  // Child stream derived from the root seed and an index only, so it does not
  // depend on how many draws the parent has made.
  RandomnessSource split(std::uint64_t index) const {
    return RandomnessSource(mix(seed_ ^ mix(index + 0x9e3779b97f4a7c15ULL)));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dp
