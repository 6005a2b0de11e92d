#pragma once

// Counter-based pseudo-random streams (splitmix64).  Every consumer derives its
// own stream key from a master seed plus a tag path, so results never depend on
// the order in which independent pieces of work consume randomness.  This is
// what makes sampled output reproducible across thread counts: each replicate
// gets its own substream keyed by (seed, tag, replicate index).

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace maxfield {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 output function (Steele/Lea/Flood); also used as the key mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stream tags.  Keep stable: the documented seed scheme is part of the output
// contract (same seed + same config => byte-identical results).
namespace stream {
inline constexpr std::uint64_t kFieldSample = 1;
inline constexpr std::uint64_t kDNormBlock = 2;
inline constexpr std::uint64_t kAxiomCheck = 3;
inline constexpr std::uint64_t kEvalMc = 4;
inline constexpr std::uint64_t kBound = 5;
inline constexpr std::uint64_t kContinuity = 6;
inline constexpr std::uint64_t kImseProbe = 7;
inline constexpr std::uint64_t kConvergence = 8;
inline constexpr std::uint64_t kCopula = 9;
inline constexpr std::uint64_t kMeshProbe = 10;
}  // namespace stream

inline std::uint64_t derive_stream(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(seed + kGoldenGamma);
  for (std::uint64_t p : path) s = mix64(s ^ mix64(p + kGoldenGamma));
  return s;
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform on (0, 1]; never returns 0 so that -log(u) is finite.
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on (lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard exponential via inversion.
  double exponential() { return -std::log(uniform01()); }

  // Standard normal, Box-Muller; draws are produced in pairs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform01()));
    double theta = 6.283185307179586476925286766559 * uniform01();
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace maxfield
