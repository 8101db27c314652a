#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace haarcode {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

/// Random stream keyed by (seed, index). Two streams with the same key produce
/// identical sequences regardless of when or on which thread they are created.
/// Normal variates use Box-Muller on our own uniforms so the output does not
/// depend on the standard library's distribution implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index)
      : engine_(combine_seed(seed, index)) {}

  static RandomStream derive(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(seed, index);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace haarcode
