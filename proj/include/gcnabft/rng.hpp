#pragma once

#include <cstdint>

namespace gcnabft {

// Deterministic RNG used everywhere randomness is needed. std::mt19937_64 is
// portable but the std distributions are not; report bytes must not depend on
// libstdc++ internals, so the full draw pipeline is pinned here.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL);
  return splitmix64(s);
}

// Splittable stream: every draw is a pure function of (seed, stream, counter),
// so parallel consumers stay reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix_seed(seed, stream)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Unbiased integer in [0, n) via rejection of the wrap-around zone.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t state_;
};

// Per-trial stream derivation for fault campaigns: (master_seed, trial index)
// select the stream, the draw counter advances inside Rng.
inline Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial) {
  return Rng(master_seed, 0x7261696c5f744c00ULL ^ trial);
}

}  // namespace gcnabft
