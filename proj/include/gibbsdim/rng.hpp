#ifndef GIBBSDIM_RNG_HPP
#define GIBBSDIM_RNG_HPP

#include <cstdint>

namespace gibbsdim {

// Pinned generator for every stochastic experiment: splitmix64
// (Vigna's counter-based generator; state advances by the golden gamma,
// output is the murmur-style 2-round finalizer). Orbit batches derive
// per-orbit seeds with derive_seed so results are order-independent.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits; never returns 1.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr const char* name() { return "splitmix64"; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

// Per-orbit seed from (master seed, orbit index); independent of
// generation order within a batch.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return SplitMix64::mix(master + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

}  // namespace gibbsdim

#endif
