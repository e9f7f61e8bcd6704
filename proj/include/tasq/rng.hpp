#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tasq {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic RNG. All distributions are derived from the raw 64-bit
// stream with explicit formulas so that a given seed reproduces the same
// sequence on every build of this project (the std::* distribution objects
// are implementation-defined and are deliberately avoided).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(gen_() % span);
  }

  // Box-Muller; the sine branch is discarded to keep the stream simple.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double lognormal(double log_mean, double log_sigma) {
    return std::exp(log_mean + log_sigma * normal());
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Independent child stream keyed off the original seed only, so entities
  // generated from forks do not depend on how much of this stream was used.
  Rng fork(std::uint64_t stream) const { return Rng(mix64(seed_ ^ mix64(stream))); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace tasq
