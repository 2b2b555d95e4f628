#pragma once

// Counter-based random numbers (Philox4x32-10).
//
// Every random draw is a pure function of (key, counter), so a matrix entry
// can be generated from (seed, trial, row, column) without any shared
// generator state. This is what makes trial farming reproducible regardless
// of how trials are scheduled across workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace dwl {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

constexpr PhiloxCounter philox_round(const PhiloxCounter& ctr, const PhiloxKey& key) {
  std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
  mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
  mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
  return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

/// Philox4x32 with 10 rounds; output matches the Random123 reference.
constexpr PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += detail::kPhiloxW0;
      key[1] += detail::kPhiloxW1;
    }
    ctr = detail::philox_round(ctr, key);
  }
  return ctr;
}

/// splitmix64 finalizer, used to derive independent seeds from a parent seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Uniform double in [0, 1) with 53 random bits taken from two words.
constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// A random block addressed by a 4-word coordinate under a 64-bit seed.
///
/// `draw(c0, c1, c2, c3)` returns two independent uniforms; `normals` turns
/// them into two independent standard normals with Box-Muller. Box-Muller is
/// used instead of std::normal_distribution so results are identical across
/// standard library implementations.
class CounterRng {
 public:
  struct Uniform2 {
    double u0;
    double u1;
  };
  struct Normal2 {
    double z0;
    double z1;
  };

  constexpr explicit CounterRng(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr PhiloxCounter raw(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                              std::uint32_t c3) const {
    return philox4x32({c0, c1, c2, c3}, key_);
  }

  constexpr Uniform2 uniforms(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                              std::uint32_t c3) const {
    const auto w = raw(c0, c1, c2, c3);
    return {to_unit(w[0], w[1]), to_unit(w[2], w[3])};
  }

  Normal2 normals(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3) const {
    const auto [u0, u1] = uniforms(c0, c1, c2, c3);
    // 1 - u0 lies in (0, 1], so the log is finite.
    const double radius = std::sqrt(-2.0 * std::log1p(-u0));
    const double angle = 2.0 * std::numbers::pi * u1;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  constexpr const PhiloxKey& key() const { return key_; }

 private:
  PhiloxKey key_;
};

/// Sequential stream over a counter-based generator, for code that wants a
/// plain engine (permutation tests, random probes). Satisfies
/// UniformRandomBitGenerator so it works with std::shuffle.
class CounterStream {
 public:
  using result_type = std::uint32_t;

  constexpr CounterStream(std::uint64_t seed, std::uint32_t stream) : rng_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  constexpr result_type operator()() {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  constexpr double uniform() {
    const std::uint32_t hi = (*this)();
    const std::uint32_t lo = (*this)();
    return to_unit(hi, lo);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u0 = uniform();
    const double u1 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u0)) * std::cos(2.0 * std::numbers::pi * u1);
  }

  /// Uniform integer in [0, bound) by rejection, free of modulo bias.
  constexpr std::uint32_t below(std::uint32_t bound) {
    const std::uint32_t limit = max() - max() % bound;
    for (;;) {
      const std::uint32_t x = (*this)();
      if (x < limit) return x % bound;
    }
  }

 private:
  constexpr void refill() {
    block_ = rng_.raw(static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                      stream_, 0x5EEDu);
    ++counter_;
    pos_ = 0;
  }

  CounterRng rng_;
  std::uint32_t stream_;
  std::uint64_t counter_ = 0;
  PhiloxCounter block_{};
  int pos_ = 4;
};

}  // namespace dwl
