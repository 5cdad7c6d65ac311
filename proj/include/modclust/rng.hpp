#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>

namespace modclust {

/// Anything the search operators can draw randomness from. Tests inject
/// scripted sources through this seam.
template <typename R>
concept UniformSource = requires(R& r, std::size_t n) {
  { r.uniform01() } -> std::convertible_to<double>;
  { r.below(n) } -> std::convertible_to<std::size_t>;
};

/// Reproducible generator: 64-bit Mersenne Twister (std::mt19937_64, whose
/// output sequence is fixed by the C++ standard) with hand-written
/// distributions, so a seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n-1}; unbiased rejection. `n` must be positive.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return static_cast<std::size_t>(x % bound);
    }
  }

 private:
  std::mt19937_64 engine_;
};

static_assert(UniformSource<Rng>);

}  // namespace modclust
