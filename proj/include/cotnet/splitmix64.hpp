#pragma once

#include <cstdint>

namespace cotnet {

// splitmix64 (Steele/Lea/Flood). Fixed here as the cross-platform
// reproducibility contract: every seeded draw in the project goes through
// this generator so fixtures are bit-identical everywhere.
class Splitmix64 {
 public:
  explicit Splitmix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) using the top 53 bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Truncation bias is < 2^-53 per draw, which is
  // irrelevant for the small n used here; what matters is determinism.
  std::uint32_t uniform_int(std::uint32_t n) {
    return static_cast<std::uint32_t>(uniform01() * static_cast<double>(n));
  }

 private:
  std::uint64_t state_;
};

}  // namespace cotnet
