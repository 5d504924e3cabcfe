#pragma once

namespace cpd {

// Band-limited smoothing kernel, defined in the frequency domain: flat at 1
// on [-u0, u0], then a C^2 quintic taper down to 0 at |u| = 1. All estimator
// math consumes ft(); space-domain values exist for diagnostics and for the
// drift normalization constant.
struct KernelSpec {
  double u0 = 0.5;
  double c = 0.0; // 2*(int_0^1 K(x) dx - K(1)); must stay away from 0

  double ft(double u) const;    // Fourier transform, support [-1, 1], even
  double space(double x) const; // K(x) by quadrature of the inverse transform
};

// computes c and validates; throws Errc::config for bad u0,
// Errc::kernel_degenerate if |c| < 1e-6
KernelSpec make_kernel(double u0 = 0.5);

} // namespace cpd
