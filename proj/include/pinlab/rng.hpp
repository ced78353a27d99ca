#pragma once

// Seeding and random streams. The generator algorithms are fixed (SplitMix64
// for seed derivation, xoshiro256++ for streams, Box-Muller for Gaussians) so
// that any reimplementation reproduces the same disorder bit for bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace pinlab {

/// One SplitMix64 step: advances `state` and returns the mixed output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for replica `index`: SplitMix64(seed XOR index * golden).
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t state = seed ^ (index * 0x9E3779B97F4A7C15ULL);
  return splitmix64_next(state);
}

class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1].
  double uniform_pos() noexcept { return 1.0 - uniform(); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

/// Standard Gaussians by Box-Muller. Both variates of each pair are used,
/// cosine branch first.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) noexcept : rng_(seed) {}

  double operator()() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform_pos();
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  Xoshiro256pp rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::vector<double> gaussian_vector(std::uint64_t seed, std::size_t n) {
  GaussianStream g(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = g();
  return v;
}

}  // namespace pinlab
