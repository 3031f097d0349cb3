#include "riskformer/rng.hpp"

#include <cmath>
#include <numbers>

#include "riskformer/errors.hpp"

namespace riskformer {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index + 1) * 0x9E3779B97F4A7C15ULL);
}

int Rng::uniform_int(int lo, int hi) {
  if (lo > hi) throw ContractError("uniform_int: empty range");
  const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  const std::uint64_t limit = range * (UINT64_MAX / range);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return lo + static_cast<int>(x % range);
}

double Rng::normal() {
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double rate) {
  if (rate <= 0.0) throw ContractError("exponential: rate must be positive");
  return -std::log(uniform_open()) / rate;
}

}  // namespace riskformer
