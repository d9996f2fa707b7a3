#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "derivelog/point_set.hpp"

namespace derivelog {

/// SplitMix64 finaliser. Used to derive independent per-index seeds so that
/// sampled sweeps give the same answer regardless of how work is split.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// std::mt19937_64 has a fully specified output sequence; the helpers below
/// avoid the implementation-defined standard distributions so results are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// True with probability num/den.
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

  /// Uniform subset of {0..n-1}.
  PointSet subset(std::size_t n) {
    PointSet s;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 64 == 0) buffer_ = engine_();
      if ((buffer_ >> (i % 64)) & 1U) s.insert(static_cast<Point>(i));
    }
    return s;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t buffer_ = 0;
};

}  // namespace derivelog
