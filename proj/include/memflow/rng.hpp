#ifndef MEMFLOW_RNG_HPP
#define MEMFLOW_RNG_HPP

#include <cmath>
#include <cstdint>

namespace memflow {

// splitmix64; used only to expand user seeds into PCG initializers.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// PCG-XSH-RR 64/32. All randomness in the project flows through this
// generator so that a (seed, stream) pair reproduces byte-identical output
// everywhere. Streams separate independent consumers of one user seed
// (instance generation, per-restart initial states, noise).
class Pcg32 {
 public:
  Pcg32(uint64_t seed, uint64_t stream = 0) {
    SplitMix64 sm(seed);
    uint64_t initstate = sm.next();
    uint64_t initseq = sm.next() + stream;
    state_ = 0;
    inc_ = (initseq << 1) | 1u;
    next_u32();
    state_ += initstate;
    next_u32();
  }

  uint32_t next_u32() {
    uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    uint32_t xorshifted = static_cast<uint32_t>(((old >> 18) ^ old) >> 27);
    uint32_t rot = static_cast<uint32_t>(old >> 59);
    return (xorshifted >> rot) | (xorshifted << ((32 - rot) & 31));
  }

  // Unbiased draw in [0, bound) by rejection (canonical pcg32 method).
  uint32_t bounded(uint32_t bound) {
    uint32_t threshold = (-bound) % bound;
    for (;;) {
      uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

  bool next_bool() { return (next_u32() & 1u) != 0; }

  // Uniform on the open interval (0, 1).
  double uniform_open01() {
    return (static_cast<double>(next_u32()) + 0.5) * 0x1.0p-32;
  }

  // Uniform on the open interval (-1, 1).
  double uniform_pm1() { return 2.0 * uniform_open01() - 1.0; }

  // Standard normal via Box-Muller. Two u32 draws per call, no spare cached;
  // deterministic across platforms unlike std::normal_distribution.
  double gaussian() {
    double u1 = uniform_open01();
    double u2 = static_cast<double>(next_u32()) * 0x1.0p-32;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  uint64_t state_;
  uint64_t inc_;
};

}  // namespace memflow

#endif
