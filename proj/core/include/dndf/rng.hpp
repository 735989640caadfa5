#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dndf/error.hpp"

namespace dndf {

/// Deterministic RNG used everywhere seeds matter. Distribution sampling is
/// done by hand on top of mt19937_64 so output streams do not depend on the
/// standard library's (implementation-defined) distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n) via rejection (unbiased).
  std::size_t index(std::size_t n) {
    if (n == 0) throw ValidationError("Rng::index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  /// k distinct indices drawn from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw ValidationError("Rng::sample_without_replacement: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = index(pool.size());
      out.push_back(pool[j]);
      pool[j] = pool.back();
      pool.pop_back();
    }
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

/// splitmix64 finalizer; used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dndf
