#include "cpd/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cpd/errors.hpp"

namespace cpd {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng64::normal() {
  // draw until u1 > 0 so log() is finite
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244008443621048); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(Errc::config, "normal_quantile: p must lie in (0,1)");
  // Acklam's rational approximation, then one Newton step against erfc
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  for (int it = 0; it < 2; ++it) {
    double e = normal_cdf(x) - p;
    double pdf = 0.3989422804014326779399460599344 * std::exp(-0.5 * x * x);
    if (pdf <= 0.0) break;
    x -= e / pdf;
  }
  return x;
}

double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 8.0) return 1.0;
  // K(x) = 1 - 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)
  double s = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * x * x);
    s += sign * term;
    sign = -sign;
    if (term < 1e-18) break;
  }
  double v = 1.0 - 2.0 * s;
  return std::clamp(v, 0.0, 1.0);
}

double ks_distance_sorted(const std::vector<double>& sorted, double (*cdf)(double)) {
  const std::size_t m = sorted.size();
  if (m == 0) fail(Errc::config, "ks_distance_sorted: empty sample");
  double d = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double f = cdf(sorted[i]);
    double lo = static_cast<double>(i) / static_cast<double>(m);
    double hi = static_cast<double>(i + 1) / static_cast<double>(m);
    d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
  }
  return d;
}

double ks_pvalue(double d, std::size_t m) {
  if (m == 0) fail(Errc::config, "ks_pvalue: empty sample");
  return 1.0 - kolmogorov_cdf(std::sqrt(static_cast<double>(m)) * d);
}

} // namespace cpd
