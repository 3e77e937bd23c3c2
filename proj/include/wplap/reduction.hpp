#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wplap {

/* Deterministic pairwise (tree) summation.
 *
 * The reduction tree depends only on the length of the input, never on
 * evaluation order, so a buffer filled by any schedule reduces to the same
 * bits.  Blocks of up to 16 elements are summed left to right; longer
 * ranges split at the largest power of two below the length, which keeps
 * the recursion depth logarithmic and the rounding error O(log n) in the
 * worst case.
 */
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t half = 1;
  while (half * 2 < v.size()) half *= 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/* Splittable counter-based random stream.
 *
 * Every draw is a pure function of (seed, stream, counter), so samples can
 * be generated in any order (or parallel) and extending a run keeps all
 * earlier draws unchanged.  Mixing is the SplitMix64 finalizer applied to
 * the combined key.
 */
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = mix(z);
    z += 0xBF58476D1CE4E5B9ULL * (counter + 1);
    return mix(z);
  }

  // Uniform double in [0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(std::uint64_t stream, std::uint64_t counter, double lo,
                 double hi) const {
    return lo + (hi - lo) * uniform(stream, counter);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t seed_;
};

}  // namespace wplap
