#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "valiron/linalg.hpp"

namespace valiron {

// Counter-based stream: every (seed, index) pair owns an independent
// generator, so sample i is the same no matter which order samples are drawn.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index)
      : state_(mix(seed ^ mix(index + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on the disk |c| <= radius.
  Complex disk(double radius) {
    const double r = radius * std::sqrt(uniform());
    const double t = 2.0 * std::numbers::pi * uniform();
    return std::polar(r, t);
  }

  // Uniform on the unit sphere of C^n (n >= 1).
  CVector unit_vector(std::size_t n) {
    CVector v(n);
    double acc = 0.0;
    do {
      acc = 0.0;
      for (auto& c : v) {
        c = Complex(normal(), normal());
        acc += std::norm(c);
      }
    } while (acc < 1e-300);
    const double s = 1.0 / std::sqrt(acc);
    for (auto& c : v) c *= s;
    return v;
  }

  double normal() {
    // Box-Muller; uniform() < 1 so 1 - u > 0.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace valiron
