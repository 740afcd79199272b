#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace zerosum {

// SplitMix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for a named substream of `seed`, optionally indexed (iteration,
// episode, ...). All randomness in the library flows through this.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t index = 0);

// Thin wrapper over mt19937_64 with platform-independent sampling helpers
// (the std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  int index(int n);
  double normal();
  // Index drawn from a discrete distribution (need not be normalized).
  int categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace zerosum
