#pragma once

// Deterministic random numbers.  Every random draw in the library flows from
// a caller-supplied 64-bit seed through the helpers here, so results are
// reproducible bit for bit regardless of platform or thread count.  The std
// distribution classes are avoided on purpose: their output is
// implementation-defined, these helpers are not.

#include <cstdint>
#include <initializer_list>

namespace avqo {

/// splitmix64 mixing step (Steele, Lea, Flood; public domain reference code).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from a base seed and a path of indices.  Used to give
/// every (instance, variant, purpose) job its own independent stream while
/// keeping the whole run a pure function of one top-level seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = base;
  splitmix64(s);
  for (std::uint64_t p : path) {
    s ^= p + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    splitmix64(s);
  }
  return splitmix64(s);
}

/// Small counter-free generator: splitmix64 iterated on its own state.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64(state_); }

  /// Uniform integer in [0, bound).  Rejection sampling on the top range keeps
  /// the draw exactly uniform.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
    std::uint64_t x = next();
    while (x > limit) x = next();
    return x % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() & 1u) != 0; }

 private:
  std::uint64_t state_;
};

}  // namespace avqo
