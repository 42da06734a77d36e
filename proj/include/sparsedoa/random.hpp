#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "sparsedoa/types.hpp"

namespace sdoa {

/// Seedable random stream. The engine is mt19937_64 and all derived
/// distributions are computed here (not via <random> distributions), so a
/// seed reproduces the same draws on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double normal();
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  cdouble complex_normal(double variance);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent child seed from a parent seed and a key path.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys);

/// Stable 64-bit FNV-1a hash, used to turn stream names into seed keys.
std::uint64_t hash_name(std::string_view name);

}  // namespace sdoa
