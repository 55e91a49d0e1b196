#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace serkit {

uint64_t splitmix64(uint64_t x);

// Deterministic random source. All sampling transforms are implemented here
// (rather than through std distributions) so that a given seed produces the
// same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t seed() const noexcept { return seed_; }
  uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }
  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform integer on [0, n). n must be > 0.
  uint64_t uniform_int(uint64_t n);

  // Standard normal via Box-Muller. Consumes two raw draws per call.
  double normal();
  // Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);
  // Beta(a, b) from two gamma draws.
  double beta(double a, double b);

  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (size_t i = v.size() - 1; i > 0; --i) {
      size_t j = static_cast<size_t>(uniform_int(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  // Independent substream. Derivation depends only on the original seed and
  // the salt, never on how much of this stream has been consumed.
  Rng child(uint64_t salt) const { return Rng(splitmix64(seed_ ^ salt)); }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace serkit
