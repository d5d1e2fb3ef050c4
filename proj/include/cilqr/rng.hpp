#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

#include "cilqr/types.hpp"

namespace cilqr {

/// Deterministic splittable generator (splitmix-style). The draw sequence is a
/// pure function of (seed, stream), so concurrent consumers with distinct
/// stream ids are independent and reproducible.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0) {
    state_ = mix(seed ^ 0x9E3779B97F4A7C15ULL);
    state_ = mix(state_ + mix(stream + 0xD1B54A32D192ED03ULL));
  }

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  /// Independent standard-normal pair (Box-Muller). log argument stays in (0,1].
  Vec2 gaussian_pair() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return Vec2(r * std::cos(t), r * std::sin(t));
  }

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

 private:
  uint64_t state_ = 0;
};

}  // namespace cilqr
