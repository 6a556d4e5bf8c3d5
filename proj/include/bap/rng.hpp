#pragma once

#include <cstdint>
#include <random>

namespace bap {

// Seedable 64-bit generator with deterministic stream splitting.
//
// Substreams are derived from the root seed and a stream index, never from
// the current engine state, so `rng.stream(k)` yields the same sequence no
// matter how much the parent has been consumed or on which thread it runs.
// Stream rule: seed_k = splitmix64(seed + (k + 1) * 0x9E3779B97F4A7C15).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  Rng stream(std::uint64_t index) const {
    return Rng(seed_ + (index + 1) * UINT64_C(0x9E3779B97F4A7C15));
  }

  std::uint64_t seed() const { return seed_; }

  std::mt19937_64& engine() { return engine_; }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(engine_);
  }

  bool bernoulli() { return std::uniform_int_distribution<int>(0, 1)(engine_) == 1; }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  double chi_squared_1() {
    const double z = normal();
    return z * z;
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += UINT64_C(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)) * UINT64_C(0x94D049BB133111EB);
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace bap
