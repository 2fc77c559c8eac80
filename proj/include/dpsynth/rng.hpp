#pragma once

#include <cstdint>

namespace dpsynth {

// Counter-based pseudo random generator (splitmix64 finalizer over a keyed
// counter). Streams derived through derive() are statistically independent,
// so parallel callers can hand out one child per block/trial and replay any
// of them in isolation. All draws are pure functions of (seed, derivation
// path, counter), which is what the release pipeline needs for byte-exact
// reproducibility.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed + kGolden)) {}

  // Child generator for an independent stream. Children of distinct
  // (parent, stream) pairs never share a key.
  CounterRng derive(std::uint64_t stream) const {
    CounterRng child(0);
    child.key_ = mix(key_ ^ mix(stream + kGolden));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Modulo bias is < 2^-40 for the n used here (desk-scale counts).
    return next_u64() % n;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dpsynth
