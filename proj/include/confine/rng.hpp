#pragma once

#include <cstdint>

namespace confine {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Per-(n, trial) stream key:
///   h = mix(master + G); h = mix((h ^ n) + G); h = mix((h ^ trial) + G)
/// with G = 0x9e3779b97f4a7c15 and mix the SplitMix64 finalizer.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n, std::uint64_t trial) {
  std::uint64_t h = splitmix64_mix(master + kGoldenGamma);
  h = splitmix64_mix((h ^ n) + kGoldenGamma);
  h = splitmix64_mix((h ^ trial) + kGoldenGamma);
  return h;
}

/// Counter-based generator: draw k (k = 0, 1, ...) is
/// mix(key + (k + 1) * G), i.e. SplitMix64 started at `key`.
/// uniform() maps the top 53 bits to [0, 1).
class CounterRng {
public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * kGoldenGamma);
  }

  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace confine
