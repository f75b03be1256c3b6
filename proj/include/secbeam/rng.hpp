#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace secbeam {

// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
std::uint64_t mix64(std::uint64_t x);

// Fold several seed components (master seed, experiment id hash, sweep index,
// trial index, stream salt ...) into one stream seed. Order-sensitive.
std::uint64_t seed_combine(std::initializer_list<std::uint64_t> parts);

// FNV-1a over bytes; used to hash experiment/scheme ids into seed material.
std::uint64_t hash_string(const char* s);

// Deterministic RNG wrapper. mt19937_64 has a standard-specified output
// sequence; the uniform/normal conversions are done by hand because the
// std::*_distribution classes are implementation-defined and would break
// bit-for-bit reproducibility across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on (0,1]: 53-bit mantissa, never returns 0 (safe for log()).
  double uniform() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; second value cached.
  double normal();

  // Circularly-symmetric complex Gaussian CN(0,1): re,im ~ N(0, 1/2).
  std::complex<double> cnormal() {
    const double s = 0x1.6a09e667f3bcdp-1;  // 1/sqrt(2)
    double re = normal();
    double im = normal();
    return {re * s, im * s};
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace secbeam
