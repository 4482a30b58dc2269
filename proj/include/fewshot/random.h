#ifndef FEWSHOT_RANDOM_H_
#define FEWSHOT_RANDOM_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fewshot {

// Seeded generator whose every derived draw is fully specified, so that
// results are identical across standard library implementations.
// (std::uniform_*_distribution and std::shuffle are not.)
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  uint64_t uniform_index(uint64_t n) {
    // Reject the top partial block to stay exactly uniform.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (size_t i = values.size(); i > 1; --i) {
      const size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Bijective 64-bit mixer; used to derive independent sub-stream seeds.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace fewshot

#endif  // FEWSHOT_RANDOM_H_
