#pragma once

#include <cmath>
#include <cstdint>

namespace sgt {

// Counter-based splittable generator built on SplitMix64. Every consumer
// derives its own stream from a root seed, so results are reproducible
// bit-for-bit regardless of evaluation order or thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Child stream for a named purpose; deriving never disturbs this stream.
  Rng derive(std::uint64_t stream) const {
    return Rng(mix(state_ ^ mix(stream + 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection-free multiply-shift; bias is negligible for n << 2^64 but we
    // keep the exact path for determinism, not statistics.
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  int uniform_index(int n) { return static_cast<int>(uniform_int(static_cast<std::uint64_t>(n))); }

  // Standard normal via Box-Muller; avoids std::normal_distribution so the
  // stream is identical across standard libraries.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sgt
