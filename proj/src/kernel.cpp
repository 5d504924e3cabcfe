#include "cpd/kernel.hpp"

#include <cmath>
#include <functional>

#include "cpd/errors.hpp"

namespace cpd {

namespace {

// composite Simpson with an even panel count
double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * i);
  return s * h / 3.0;
}

} // namespace

double KernelSpec::ft(double u) const {
  double a = std::abs(u);
  if (a >= 1.0) return 0.0;
  if (a <= u0) return 1.0;
  double s = (a - u0) / (1.0 - u0);
  // quintic smoothstep: value, slope, and curvature vanish at both ends
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double KernelSpec::space(double x) const {
  // K(x) = (1/pi) [ sin(u0 x)/x + int_{u0}^{1} ft(u) cos(ux) du ]
  double flat = x == 0.0 ? u0 : std::sin(u0 * x) / x;
  double taper = simpson([this, x](double u) { return ft(u) * std::cos(u * x); }, u0, 1.0, 4096);
  return (flat + taper) / std::acos(-1.0);
}

KernelSpec make_kernel(double u0) {
  if (!(u0 > 0.0) || !(u0 < 1.0)) fail(Errc::config, "kernel taper start must lie in (0,1)");
  KernelSpec k;
  k.u0 = u0;
  // c = 2(int_0^1 K - K(1)) reduces to a single frequency-domain integral:
  // c = (2/pi) int_0^1 ft(v) (sin(v)/v - cos(v)) dv, split at the taper knee
  auto g = [&k](double v) {
    double sinc = v == 0.0 ? 1.0 : std::sin(v) / v;
    return k.ft(v) * (sinc - std::cos(v));
  };
  double pi = std::acos(-1.0);
  k.c = 2.0 / pi * (simpson(g, 0.0, u0, 2048) + simpson(g, u0, 1.0, 2048));
  if (std::abs(k.c) < 1e-6)
    fail(Errc::kernel_degenerate, "drift normalization constant is too close to zero");
  return k;
}

} // namespace cpd
