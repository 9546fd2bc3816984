#pragma once

#include <cmath>
#include <cstdint>

namespace sr1 {

/// Deterministic random stream: splitmix64 underneath, Box-Muller on top.
/// The exact draw sequence is part of the interface contract (see README),
/// so any reimplementation seeded identically produces identical values.
class SeededRng {
public:
  explicit SeededRng(uint64_t seed) : state_(seed) {}

  /// Child stream for (base_seed, index); used for per-trial and per-step
  /// streams so random access agrees with sequential access.
  static SeededRng derived(uint64_t base_seed, uint64_t index) {
    SeededRng t(base_seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return SeededRng(t.next_u64());
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53 random bits.
  double next_uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal; pairs of uniforms are consumed atomically and the
  /// sine half of each Box-Muller pair is returned on the following call.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // log(0) guard, keeps the stream aligned
    const double u2 = next_uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sr1
