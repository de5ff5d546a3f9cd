#pragma once

#include <cstdint>
#include <random>

#include "oamjrc/linalg.hpp"

namespace oamjrc {

/// splitmix64 finalizer; used to derive independent per-trial seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic seed for a (base, a, b, c) tuple, e.g. (base, snr, mu, trial).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// Deterministic generator for circular complex Gaussian samples.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// CN(0, variance): real and imaginary parts each carry variance/2.
  cdouble complex_gaussian(double variance);
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);
  bool bit() { return (engine_() >> 63) != 0; }

  /// Fill a matrix with i.i.d. CN(0, variance) entries.
  void fill_complex_gaussian(CMatrix& m, double variance);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace oamjrc
