#pragma once

// Deterministic random streams. Sampling is built from a SplitMix64 state
// machine plus explicit transforms (Box-Muller for normals, inverse CDF for
// exponentials), so identically seeded streams are bit-identical on every
// platform and toolchain. Role-tagged sub-seeds let one master seed drive
// several independent streams.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "zopd/vec.hpp"

namespace zopd {

class SplitMix64 {
 public:
  SplitMix64() = default;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]; never returns 0 so log() stays finite.
  double uniform01() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }

  void seed(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_ = 0;
};

// Pure function of (master, role): FNV-1a over the role tag, mixed with the
// master seed through one SplitMix64 step.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view role) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : role) {
    h ^= c;
    h *= 1099511628211ull;
  }
  SplitMix64 mix(master ^ h);
  return mix.next();
}

// One i.i.d. standard normal vector.
struct GaussianDraw {
  Vec values;

  int dim() const { return static_cast<int>(values.size()); }
};

// Stream of N(0, 1) variates via Box-Muller over a SplitMix64 stream.
class GaussianStream {
 public:
  GaussianStream() = default;
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform01();
    const double u2 = rng_.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  GaussianDraw draw(int dim) {
    GaussianDraw out;
    out.values.resize(static_cast<std::size_t>(dim));
    for (double& v : out.values) v = next();
    return out;
  }

 private:
  SplitMix64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace zopd
