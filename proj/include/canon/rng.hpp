#pragma once

#include <cstdint>
#include <random>

namespace canon {

// Deterministic stream: mt19937_64 plus hand-written variate transforms, so
// identical seeds give identical draws on every platform (std::*_distribution
// outputs are implementation-defined, so we do not use them).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on (0,1), strictly inside the open interval.
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller pair; the second value is cached.
  double normal();

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape, double rate);

  // Sequential inversion below mean 10, Hormann PTRS transformed rejection
  // above; both consume the uniform stream deterministically.
  std::int64_t poisson(double mean);

  std::int64_t binomial(std::int64_t n, double p);

 private:
  std::mt19937_64 eng_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Stable per-task seed derivation (splitmix64 finalizer over seed and index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace canon
