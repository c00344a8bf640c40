#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "elspot/stats.hpp"

namespace elspot {

// Stateless mixer used to derive independent per-task seeds from a base seed
// and a task counter, so parallel work is reproducible at any thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
  return splitmix64(base ^ splitmix64(counter + 0x51a7bca4e1d3f0c9ULL));
}

// All randomness in the library flows through this wrapper. Distributions are
// implemented explicitly (inverse-CDF where possible) so streams do not depend
// on the standard library's unspecified algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform on (0,1); never returns an exact 0 or 1.
  double uniform() {
    const double u = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    return u;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() { return normal_quantile(uniform()); }

  double exponential() { return -std::log(uniform()); }

  // Marsaglia–Tsang for shape >= 1, boost trick below 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  template <std::size_t K>
  std::array<double, K> dirichlet(const std::array<double, K>& alpha) {
    std::array<double, K> g{};
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      g[k] = gamma(alpha[k]);
      s += g[k];
    }
    for (std::size_t k = 0; k < K; ++k) g[k] /= s;
    return g;
  }

  // Standard normal truncated to [a, b]; robust to intervals deep in a tail.
  double truncated_standard_normal(double a, double b);

  double truncated_normal(double mu, double sigma, double lo, double hi) {
    return mu + sigma * truncated_standard_normal((lo - mu) / sigma, (hi - mu) / sigma);
  }

 private:
  std::mt19937_64 gen_;
};

inline double Rng::truncated_standard_normal(double a, double b) {
  if (!(a < b)) return a;  // degenerate interval
  if (a > 37.0) {
    // Robert (1995) exponential proposal for a far right-tail interval.
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      const double x = a + exponential() / alpha;
      if (x > b) continue;
      const double rho = std::exp(-0.5 * (x - alpha) * (x - alpha));
      if (uniform() <= rho) return x;
    }
  }
  if (b < -37.0) return -truncated_standard_normal(-b, -a);
  // Inverse-CDF on whichever tail representation keeps the mass well scaled.
  if (a >= 0.0) {
    const double ca = normal_cdf(-a), cb = normal_cdf(-b);  // upper-tail masses
    const double u = cb + (ca - cb) * uniform();
    return -normal_quantile(u);
  }
  if (b <= 0.0) return -truncated_standard_normal(-b, -a);
  const double fa = normal_cdf(a), fb = normal_cdf(b);
  const double u = fa + (fb - fa) * uniform();
  return normal_quantile(u);
}

}  // namespace elspot
