#pragma once

#include <cmath>
#include <cstdint>

namespace knudsen {

// Counter-based pseudo-random generator: a Weyl sequence run through the
// splitmix64 finalizer. Streams are pure functions of (master_seed,
// stream_index), so parallel ensembles give the same numbers no matter how
// work is scheduled across threads.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static SplitMix64 stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    return SplitMix64(mix(master_seed ^ mix(stream_index * kGamma + 0x1d8e4e27c47d124fULL)));
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double uniform01_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // standard normal via Box-Muller (no cached spare; two uniforms per draw)
  double normal() {
    const double u1 = uniform01_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692529 * u2);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace knudsen
