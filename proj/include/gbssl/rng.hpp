#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gbssl {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Splittable seed derivation: mixes a master seed with up to three stream
// tags so that (grid point, replica, purpose) streams are independent.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t st = master;
  st ^= splitmix64(a) + 0x9e3779b97f4a7c15ULL;
  splitmix64(st);
  st ^= splitmix64(b) + 0xbf58476d1ce4e5b9ULL;
  splitmix64(st);
  st ^= splitmix64(c) + 0x94d049bb133111ebULL;
  return splitmix64(st);
}

// Deterministic generator with explicit uniform/gaussian transforms so that
// streams do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t st = seed;
    gen_.seed(splitmix64(st));
  }

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // standard normal via Marsaglia polar, one value cached
  double gaussian() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cache_ = v * f;
    has_cache_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 gen_;
  double cache_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace gbssl
