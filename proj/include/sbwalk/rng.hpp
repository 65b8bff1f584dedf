#ifndef SBWALK_RNG_HPP
#define SBWALK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace sbwalk {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for trial `index` under `master`: the index-th value of the splitmix64
// sequence seeded at `master`. Stable across releases; CSV reproducibility
// depends on it.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64_mix(master + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

// Deterministic uniform stream. mt19937_64 raw output is fully specified by
// the standard; the [0,1) mapping is done by hand because std distributions
// are not bit-reproducible across implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  // One draw in [0,1) with 53 random bits.
  double next_u01() {
    ++cursor_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() {
    ++cursor_;
    return engine_();
  }

  // Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  // Standard normal via Box-Muller on own uniforms (reproducible).
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_u01();
    double u2 = next_u01();
    while (u1 <= 0.0) u1 = next_u01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t cursor() const { return cursor_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t cursor_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sbwalk

#endif  // SBWALK_RNG_HPP
