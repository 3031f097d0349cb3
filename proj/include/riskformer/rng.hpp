#pragma once

#include <cstdint>
#include <random>

namespace riskformer {

// splitmix64 step; used for seed derivation and substreams.
std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed for (seed, index); patient-level and
// epoch-level substreams use this so generation order never matters.
std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

// Deterministic samplers on top of mt19937_64. The engine is pinned by the
// standard; the distributions are implemented here because libstdc++/libc++
// distribution objects are not bit-portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1), never returns an endpoint.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Inclusive on both ends, unbiased by rejection.
  int uniform_int(int lo, int hi);

  // Box-Muller without caching; consumes two draws per sample.
  double normal();

  // Strictly positive; rate > 0, mean 1/rate.
  double exponential(double rate);

  // Uniform on [-bound, bound].
  double uniform_symmetric(double bound) { return (2.0 * uniform() - 1.0) * bound; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace riskformer
