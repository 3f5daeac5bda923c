#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

// Seeded random number generation. The generator identity is part of the
// artifact's reproducibility contract: every seeded entry point in this
// library draws from SplitMix64 streams in a documented order, so identical
// seeds produce bit-identical instances and samples on any platform with
// IEEE-754 doubles and the same libm.
namespace entangled {

// Finalizer from SplitMix64 (Steele, Lea & Flood 2014). Bijective on 64-bit
// words; also used standalone for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed-derivation chain: order-sensitive, collision-resistant enough for
// per-trial stream splitting. derive(derive(master, a), b) != derive(master, b).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t v) noexcept {
  return mix64(seed + 0x9E3779B97F4A7C15ull + v);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    return mix64(z);
  }

  // Uniform on the open interval (0, 1): 53-bit grid offset by half a step,
  // so neither endpoint is reachable and log(u) is always finite.
  double uniform01() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the paired deviate is cached, so draws
  // consume the underlying stream two uniforms at a time.
  double normal() noexcept {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, bound) by masked rejection; unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t mask = ~0ull >> std::countl_zero(bound - 1);
    for (;;) {
      const std::uint64_t v = next() & mask;
      if (v < bound) return v;
    }
  }

  // Fisher-Yates, back to front.
  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace entangled
