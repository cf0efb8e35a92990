// Deterministic random helpers. std::uniform_*_distribution is
// implementation-defined, so every draw in this project goes through these
// to keep results byte-identical across toolchains.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace satcache {

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Unbiased bounded draw in [0, n).
  uint64_t bounded(uint64_t n) {
    if (n == 0) return 0;
    uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (size_t i = values.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // First k elements of a seeded permutation of values (k <= size).
  template <typename T>
  std::vector<T> sample(std::vector<T> values, size_t k) {
    for (size_t i = 0; i < k && i + 1 < values.size(); ++i) {
      size_t j = i + static_cast<size_t>(bounded(values.size() - i));
      std::swap(values[i], values[j]);
    }
    values.resize(k);
    return values;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace satcache
