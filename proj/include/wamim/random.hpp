#pragma once

// Deterministic PRNG shared by masking, initialization, the synthetic corpus
// and the data loader. Algorithms are fixed so that independent
// implementations reproduce the same streams bit for bit:
//
//  - SplitMix64 (Steele, Lea, Flood) expands a 64-bit seed into the
//    xoshiro256** state, four consecutive outputs.
//  - xoshiro256** (Blackman, Vigna) produces the stream.
//  - bounded(n): rejection sampling, draw r until r >= (2^64 - n) mod n,
//    return r mod n.
//  - uniform(): (next() >> 11) * 2^-53, in [0, 1).

#include <array>
#include <cstddef>
#include <cstdint>

namespace wamim {

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

// Per-item seed derivation: mix(seed ^ index) through the SplitMix64
// finalizer (after the golden-ratio increment so index 0 differs from seed).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_mix((seed ^ index) + 0x9E3779B97F4A7C15ULL);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& s : state_) s = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Fisher-Yates, drawing j = bounded(i + 1) for i = n-1 down to 1.
  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i-- > 1;) {
      const auto j = static_cast<std::size_t>(bounded(i + 1));
      std::swap(first[i], first[j]);
    }
  }

  const std::array<std::uint64_t, 4>& state() const { return state_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace wamim
