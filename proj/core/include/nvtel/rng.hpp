#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace nvtel {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Per-shot seed derivation: independent of worker layout, so ensemble results
// depend only on (master seed, shot index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return splitmix64(master ^ splitmix64(a ^ splitmix64(b ^ 0xA5A5A5A5A5A5A5A5ull)));
}

// Seeded random stream. Draws are hand-rolled from raw 64-bit output so the
// sampled values are identical across standard-library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // index into a probability vector (renormalization-free walk)
  int pick(const double* probs, int n) {
    double u = uniform();
    double cum = 0.0;
    for (int i = 0; i < n; ++i) {
      cum += probs[i];
      if (u < cum) return i;
    }
    return n - 1;
  }

  // number of trials until first success, >= 1
  std::int64_t geometric(double p) {
    if (p <= 0.0 || p > 1.0)
      throw std::invalid_argument("geometric needs p in (0,1]");
    if (p == 1.0) return 1;
    double u = uniform();
    double k = std::ceil(std::log1p(-u) / std::log1p(-p));
    return k < 1.0 ? 1 : static_cast<std::int64_t>(k);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace nvtel
