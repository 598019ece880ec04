#pragma once

#include <cmath>
#include <cstdint>

#include "psplit/types.hpp"

namespace psplit {

// Small counter-friendly generator. Streams derived from (seed, k, i) are
// independent of evaluation order, which keeps parallel block solves
// bit-identical to the serial reference.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1].
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  // Box-Muller.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = next_uniform();
    double v = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * M_PI * v);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * v);
  }

  Vec next_gaussian_vec(Index n) {
    Vec x(n);
    for (Index j = 0; j < n; ++j) x[j] = next_gaussian();
    return x;
  }

  Mat next_gaussian_mat(Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = next_gaussian();
    return m;
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2)));
    return g.next_u64();
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace psplit
