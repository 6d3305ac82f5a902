#pragma once

#include "lfi/types.hpp"

#include <random>

namespace lfi {

// splitmix64 finalizer.  Used to decorrelate (seed, stream_id) pairs before
// they reach the engine, and to derive child streams.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child streams enumerate stream_id over a base derived from the parent, so
// children of distinct parents never collide in practice.
inline NoiseSeed child_seed(NoiseSeed parent, std::uint64_t index) {
  return NoiseSeed{mix64(parent.seed, parent.stream_id), index};
}

// Deterministic random stream.  Same (seed, stream_id) gives a bit-identical
// draw sequence on every platform; the standard distribution objects are
// avoided because their draw sequences are implementation defined.
class RngStream {
 public:
  explicit RngStream(NoiseSeed s) : eng_(mix64(s.seed, s.stream_id)) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Box-Muller, cosine branch only: exactly two uniforms per call.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Exponential with given rate.
  double exponential(double rate = 1.0) {
    double u = 1.0 - uniform01();
    return -std::log(u) / rate;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace lfi
