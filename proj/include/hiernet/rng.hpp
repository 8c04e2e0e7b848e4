#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hiernet {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Random stream keyed by (seed, stream). Streams derived from the same seed
// but different stream ids are independent for practical purposes, so
// replicate k of a study can own stream k and run in any order.
//
// Uniform and normal variates are generated by fixed formulas on top of
// std::mt19937_64 (whose output sequence the standard pins down), so a given
// (seed, stream) pair yields the same draws on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(detail::splitmix64(detail::splitmix64(seed) ^
                                detail::splitmix64(stream ^ 0xd1b54a32d192ed03ULL))) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; caches the second variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace hiernet
