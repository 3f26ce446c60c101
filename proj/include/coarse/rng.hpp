#ifndef COARSE_RNG_HPP
#define COARSE_RNG_HPP

#include <cstdint>
#include <vector>

#include "coarse/rational.hpp"

namespace coarse {

/// Deterministic splittable generator (splitmix64). Streams are derived from
/// (seed, counter) so per-sample randomness is independent of scheduling and
/// identical across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  /// Stream for one indexed sample of a seeded run.
  static Rng stream(uint64_t seed, uint64_t index) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    r.next();
    return r;
  }

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n) by rejection; n >= 1.
  uint64_t below(uint64_t n) {
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

 private:
  uint64_t state_;
};

/// Samples an index from exact rational weights (need not be normalized):
/// inverse CDF against one 64-bit draw, compared exactly. Deterministic and
/// platform independent.
inline size_t sample_categorical(Rng& rng, const std::vector<Rat>& weights) {
  Rat total = 0;
  for (const Rat& w : weights) total += w;
  uint64_t draw = rng.next();
  // Accept the least i with draw/2^64 < (sum of the first i+1 weights)/total.
  Int scale = Int(1) << 64;
  Rat cumulative = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    // draw < cumulative/total * 2^64  <=>  draw * total_den * cum_den ... use exact Rat compare
    if (Rat(Int(draw), scale) < cumulative / total) return i;
  }
  return weights.size() - 1;
}

}  // namespace coarse

#endif
