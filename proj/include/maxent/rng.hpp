#pragma once

#include <cmath>
#include <cstdint>

#include "maxent/numeric.hpp"

namespace maxent {

// Deterministic splittable RNG (splitmix64 core). Streams derived from a
// master seed and a stream index are independent, so per-trial substreams
// give identical tables whether trials run serially or in parallel.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}

  static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
    Rng base(master_seed);
    const std::uint64_t a = base.next_u64();
    Rng mix(a + 0x9e3779b97f4a7c15ULL * (index + 1));
    return Rng(mix.next_u64());
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = n * ((~0ULL) / n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  long long uniform_int(long long lo, long long hi) {  // inclusive bounds
    return lo + static_cast<long long>(uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Standard normal via the polar method; self-contained so results do not
  // depend on the standard library's distribution implementation.
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  Vec normal_vec(std::size_t n) {
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  // Exponential(1), used for Dirichlet(1) mixtures.
  double exponential() { return -std::log(1.0 - uniform()); }

  Vec dirichlet_uniform(std::size_t n) {
    Vec w(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = exponential();
      s += w[i];
    }
    for (std::size_t i = 0; i < n; ++i) w[i] /= s;
    return w;
  }

  // Uniform direction on the unit sphere.
  Vec unit_vec(std::size_t n) {
    for (;;) {
      Vec v = normal_vec(n);
      const double nv = norm2(v);
      if (nv > 1e-12) return (1.0 / nv) * v;
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace maxent
