#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "cpd/kernel.hpp"
#include "cpd/model.hpp"

namespace cpd {

// Symmetric uniform grid on [-umax, umax] with an odd point count.
// u(i) = du*(i - center) so the two halves are exact negations of each other.
struct FrequencyGrid {
  double du = 0.0;
  std::size_t center = 0;
  std::size_t count = 0; // odd

  double u(std::size_t i) const {
    return du * (static_cast<double>(i) - static_cast<double>(center));
  }
  double umax() const { return du * static_cast<double>(center); }
};

// grid for kernel bandwidth h (support up to 1/h) resolving oscillations of
// scale H with `oversample` points per period; enforces du*H <= pi/8
FrequencyGrid make_grid(double h, double H, double oversample);

using ComplexVec = std::vector<std::complex<double>>;

// empirical characteristic function of the sample on the grid; exact 1 at
// u=0 and conjugate-symmetric by construction
ComplexVec ecf(const IncrementSample& sample, const FrequencyGrid& grid);

// continuous branch of log(values) along the grid, anchored at L(0)=0.
// Throws BranchAmbiguity if any |value| < kappa, PhaseJump if successive
// ratios leave the disk |r-1| <= 1/2.
ComplexVec distinguished_log(const ComplexVec& values, const FrequencyGrid& grid, double kappa);

// closed-form Fourier transforms of the estimator weight functions,
// returned as functions of u (the integral evaluates them at -u)
using FtWeight = std::function<std::complex<double>(double)>;

FtWeight ft_indicator(double a, double b);                    // F[1_[a,b]]
FtWeight ft_weight_lambda(double eps_n, double H);            // 1_{eps_n<=|x|<=H}
FtWeight ft_weight_gamma(double h, double c_norm);            // (x/c) 1_{|x|<h}
FtWeight ft_weight_atom(double center, double eps_n);         // 1_{|x-center|<eps_n}
// level weight: the lambda weight truncated at an effective level derived
// from t by the three-case rule around the nearest lattice point
FtWeight ft_weight_level(double t, double pitch, double eps_n, double H);

// effective truncation level used by ft_weight_level (exposed for tests)
double level_truncation(double t, double pitch, double eps_n);

// (1/(2*pi*delta)) * int ftw(-u) * logvals(u) * ftK(h*u) du by composite
// Simpson over the whole grid; imaginary residual must vanish by conjugate
// symmetry, otherwise SymmetryViolation
double spectral_integral(const FtWeight& ftw, const ComplexVec& logvals,
                         const FrequencyGrid& grid, const KernelSpec& kernel, double h,
                         double delta);

} // namespace cpd
