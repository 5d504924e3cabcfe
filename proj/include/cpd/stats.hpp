#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cpd {

// Compensated accumulator; keeps long quadrature sums near machine precision.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// SplitMix64. Small, portable, and fully deterministic across platforms;
// used instead of <random> engines so byte-identical reproducibility does
// not depend on library implementation details.
struct Rng64 {
  std::uint64_t state;

  explicit Rng64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller (uniforms drawn in fixed order)
  double normal();
};

std::uint64_t mix64(std::uint64_t z);

// Decorrelated stream for item k under a master seed; used for increments
// (one stream per observation) and for Monte Carlo replicates.
inline Rng64 stream_rng(std::uint64_t seed, std::uint64_t k) {
  return Rng64(mix64(seed + 0x9E3779B97F4A7C15ull) ^ mix64(k + 0x632BE59BD9B4E019ull));
}

double normal_cdf(double x);
double normal_quantile(double p); // inverse of normal_cdf on (0,1)

// Asymptotic Kolmogorov distribution K(x) = P(sup|B| <= x) and the
// one-sample KS machinery against a supplied CDF.
double kolmogorov_cdf(double x);

// D_n = sup_x |F_emp(x) - cdf(x)| for the sorted sample
double ks_distance_sorted(const std::vector<double>& sorted, double (*cdf)(double));

// p-value of the KS statistic at sample size m via the asymptotic law
double ks_pvalue(double d, std::size_t m);

} // namespace cpd
