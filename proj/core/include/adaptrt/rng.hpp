#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace adaptrt {

// Counter-based splittable generator built on the splitmix64 finalizer
// (Steele, Lea & Flood 2014; Vigna 2015).  Streams are derived by mixing a
// key path into the seed, so (seed, cell, trial, resample) always maps to
// the same stream no matter which thread consumes it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(mix(seed ^ kGolden)) {}

  // Derive an independent stream for a sub-task without perturbing *this.
  Rng split(std::uint64_t k0, std::uint64_t k1 = 0x9d3a,
            std::uint64_t k2 = 0x51f2) const {
    std::uint64_t s = state_;
    s = mix(s ^ (k0 + kGolden));
    s = mix(s ^ (k1 + kGolden));
    s = mix(s ^ (k2 + kGolden));
    return Rng(FromState{}, s);
  }

  std::uint64_t next() {
    state_ += kGolden;
    return mix(state_);
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform on {0, ..., n-1}; n >= 1.  Rejection keeps it exactly uniform.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller without caching so the draw count per call is fixed.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Index draw from unnormalized nonnegative weights; total must be > 0.
  int categorical(const std::vector<double>& w, double total) {
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      u -= w[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
  }

 private:
  struct FromState {};
  Rng(FromState, std::uint64_t s) : state_(s) {}

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace adaptrt
