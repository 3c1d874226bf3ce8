#pragma once

#include <cstdint>
#include <random>

namespace dstruct {

// Deterministic per-trial randomness: reseeding with (seed, trial) makes each
// trial independent of execution order, so parallel runs merge reproducibly.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial)
      : eng_(std::mt19937_64(seed * 0x9e3779b97f4a7c15ULL + trial + 1)) {}

  double uniform(double lo, double hi) {
    // 53-bit mantissa draw; identical across platforms for a given seed.
    const double u01 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u01;
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  bool coin(double p_true = 0.5) { return uniform(0.0, 1.0) < p_true; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace dstruct
