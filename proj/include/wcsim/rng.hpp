#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wcsim {

// splitmix64 finalizer; used to derive independent substream seeds from one
// run seed so that adding an agent group or reordering draws in one stream
// never perturbs another.
inline uint64_t mix_seed(uint64_t base, uint64_t stream) {
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic RNG wrapper. mt19937_64 output is bit-exact on every
// conforming implementation; the sampling helpers below are hand-rolled
// because the standard <random> distributions are not.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform integer in [0, n). Rejection sampling keeps the draw unbiased.
  int below(int n) {
    if (n <= 0) throw std::invalid_argument("Rng::below: n must be positive");
    const uint64_t span = uint64_t(n);
    const uint64_t cutoff =
        UINT64_MAX - (UINT64_MAX % span + 1) % span;  // accept r <= cutoff
    uint64_t r = eng_();
    while (r > cutoff) r = eng_();
    return int(r % span);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return double(eng_() >> 11) * 0x1.0p-53; }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = size_t(below(int(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Index drawn with probability weights[i] / sum(weights).
  int pick_weighted(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) {
      if (w < 0) throw std::invalid_argument("pick_weighted: negative weight");
      total += w;
    }
    if (!(total > 0)) throw std::invalid_argument("pick_weighted: zero total");
    const double r = unit() * total;
    double acc = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return int(i);
    }
    return int(weights.size() - 1);  // guard against rounding at the edge
  }

 private:
  std::mt19937_64 eng_;
};

// Named substreams hung off the run seed.
enum class Stream : uint64_t {
  kShelfKinds = 1,
  kStartCells = 2,
  kTaskGroupBase = 16,   // + group index
  kCacheGroupBase = 64,  // + group index
  kPlanner = 128,
  kFuzz = 256,
};

inline uint64_t stream_seed(uint64_t base, Stream s, uint64_t offset = 0) {
  return mix_seed(base, uint64_t(s) + offset);
}

}  // namespace wcsim
