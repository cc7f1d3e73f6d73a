#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace regionwise {

// Deterministic 64-bit linear congruential generator (MMIX multiplier).
// All derived draws (uniform, normal, Poisson, shuffles) are built from the
// raw stream with fixed arithmetic, so results are bit-identical across
// platforms and standard-library versions.
class Lcg64 {
 public:
  explicit Lcg64(std::uint64_t seed) : state_(seed) {
    // Warm up so nearby seeds decorrelate immediately.
    next();
    next();
  }

  std::uint64_t next() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
  }

  // Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is below 1e-15 for the sizes
  // used here.
  std::uint64_t below(std::uint64_t n) { return (next() >> 11) % n; }

  // Standard normal via Box-Muller; the spare draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Poisson draw by Knuth's product method. Means above 60 are split into
  // chunks and the draws summed (Poisson additivity keeps the distribution
  // exact).
  std::int64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::int64_t total = 0;
    double remaining = mean;
    while (remaining > 60.0) {
      total += poisson_knuth(60.0);
      remaining -= 60.0;
    }
    total += poisson_knuth(remaining);
    return total;
  }

  // In-place Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Sub-seed derivation for parallel streams: splitmix64 finalizer applied
  // to seed + (stream + 1) * golden-ratio increment.
  static std::uint64_t split(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::int64_t poisson_knuth(double mean) {
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace regionwise
