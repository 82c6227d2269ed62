#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

#include "springrod/quat.hpp"
#include "springrod/vec3.hpp"

namespace springrod {

/// SplitMix64 finalizer. Together with the additive constant below this is
/// the entire generator, so any implementation of these two lines reproduces
/// the exact same streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64 stream. Output i of stream s under seed k is
///   mix64(mix64(k ^ mix64(s)) + i * 0x9E3779B97F4A7C15)
/// i.e. a pure function of (seed, stream, counter). Streams are cheap to
/// fork, independent of evaluation order, and identical across platforms,
/// which is what makes datasets reproducible from a single 64-bit seed.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(seed ^ mix64(stream))) {}

  std::uint64_t next_u64() {
    return mix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec3 normal_vec3(double sigma) {
    return {sigma * normal(), sigma * normal(), sigma * normal()};
  }

  /// Uniform direction on the unit sphere (rejection-free, via normals).
  Vec3 unit_vec3() {
    Vec3 v = normal_vec3(1.0);
    double n = norm(v);
    while (n < 1e-12) {  // astronomically rare
      v = normal_vec3(1.0);
      n = norm(v);
    }
    return v / n;
  }

  /// Small random rotation: axis uniform on the sphere, angle N(0, sigma).
  Quat jitter_quat(double sigma) {
    const Vec3 axis = unit_vec3();
    return from_axis_angle(axis, sigma * normal());
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace springrod
