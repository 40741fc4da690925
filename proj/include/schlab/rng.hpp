#pragma once

// Counter-based random streams.
//
// A stream is identified by a 64-bit key; draw i of the stream is
// mix64(key + (i + 1) * kGolden), i.e. SplitMix64 run from state `key`.
// Independent streams for parallel trials are derived as
//
//     key(seed, index)      = mix64(mix64(seed) ^ (index * kStreamMul + 1))
//     key(seed, tag, index) = key(key(seed, tag), index)
//
// so trial i of a run never depends on how many draws other trials made.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace schlab {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kStreamMul = 0xd1b54a32d192ed03ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed,
                                   std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ (index * kStreamMul + 1));
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag,
                                   std::uint64_t index) noexcept {
  return stream_key(stream_key(seed, tag), index);
}

/// Purpose tags so that e.g. the noise of trial i and the eigenvalue pick of
/// trial i come from unrelated streams.
enum class StreamTag : std::uint64_t {
  model = 1,
  selection = 2,
  sde_noise = 3,
  phase = 4,
  limit_shape = 5,
  inverse_iteration = 6,
  shift = 7,
  comparison = 8,
};

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr Rng stream(std::uint64_t seed, std::uint64_t index) noexcept {
    return Rng(stream_key(seed, index));
  }
  static constexpr Rng stream(std::uint64_t seed, StreamTag tag,
                              std::uint64_t index) noexcept {
    return Rng(stream_key(seed, static_cast<std::uint64_t>(tag), index));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Index uniform on {0, ..., count - 1}; count must be positive.
  std::uint64_t below(std::uint64_t count) noexcept {
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = max() - max() % count;
    std::uint64_t x = (*this)();
    while (x >= limit) x = (*this)();
    return x % count;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace schlab
