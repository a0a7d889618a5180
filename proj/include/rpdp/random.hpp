#pragma once

// Seed derivation and the random stream used throughout the pipeline.
//
// Every random draw in the library comes from a SplitMix64 stream whose seed
// is derived from a user-supplied master seed and a counter (iteration, tree,
// row). Streams never share state, so any schedule over workers reproduces
// the same numbers.

#include <cstdint>
#include <limits>

namespace rpdp {

using Seed = std::uint64_t;

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for counter `index` under `parent`:
///   mix64(parent + (index + 1) * kGoldenGamma)
/// Injective in `index` for a fixed parent (odd multiplier, bijective mix).
constexpr Seed derive_seed(Seed parent, std::uint64_t index) noexcept {
  return mix64(parent + (index + 1) * kGoldenGamma);
}

/// Distinct stream families hanging off one seed. Keeps e.g. the tree seeds
/// of a forest from colliding with the bootstrap seeds of a Rashomon set.
enum class Stream : std::uint64_t {
  Bootstrap = 0x6273,
  Tree = 0x7472,
  Row = 0x726f,
};

constexpr Seed derive_seed(Seed parent, Stream stream, std::uint64_t index) noexcept {
  return derive_seed(mix64(parent ^ static_cast<std::uint64_t>(stream)), index);
}

/// SplitMix64 generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(Seed seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

/// Unbiased integer in [0, bound) (Lemire's multiply-and-reject). bound > 0.
template <class Rng>
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  using u128 = unsigned __int128;
  u128 m = static_cast<u128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t floor = (0 - bound) % bound;
    while (low < floor) {
      m = static_cast<u128>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Double in [0, 1) with 53 random bits.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace rpdp
