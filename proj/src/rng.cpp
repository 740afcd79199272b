#include "zerosum/rng.hpp"

#include <cmath>
#include <numbers>

#include "zerosum/error.hpp"

namespace zerosum {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t index) {
  // FNV-1a over the stream name, then mixed with seed and index.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(seed ^ h) + index);
}

int Rng::index(int n) {
  if (n <= 0) throw InvalidArgument("Rng::index: n must be positive");
  return static_cast<int>(uniform() * n);
}

double Rng::normal() {
  // Box-Muller; the second variate is discarded to keep the stream simple.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::categorical(std::span<const double> weights) {
  if (weights.empty()) throw InvalidArgument("Rng::categorical: empty weights");
  double total = 0.0;
  for (double w : weights) total += w > 0.0 ? w : 0.0;
  if (!(total > 0.0)) throw InvalidArgument("Rng::categorical: no positive weight");
  double target = uniform() * total;
  int last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    target -= weights[i];
    if (target < 0.0) return static_cast<int>(i);
  }
  return last_positive;
}

}  // namespace zerosum
