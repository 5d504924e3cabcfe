#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace cpd {

// Uniformly sampled density slice. Sample i sits at origin + i*step.
// For integration the samples are read as a piecewise linear function
// (trapezoid mass); discrete convolution reads them as point masses of
// size step*value, which agrees up to the grid refinement error.
struct DensityGrid {
  double origin = 0.0;
  double step = 0.0;
  std::vector<double> values;
  // cached last sample position; lets reflect() negate the span exactly
  // instead of reaccumulating origin + step*(size-1). NaN means "derive".
  double end = std::numeric_limits<double>::quiet_NaN();

  bool empty() const { return values.empty(); }
  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return origin + step * static_cast<double>(i); }
  double span_end() const {
    if (!std::isnan(end)) return end;
    return values.empty() ? origin : x(values.size() - 1);
  }
};

// Finite signed measure: atoms on the lattice atom_spacing * Z (sparse,
// keyed by integer index) plus an optional gridded density.
struct SignedMeasure {
  double atom_spacing = 1.0;
  std::map<std::int64_t, double> atoms;
  DensityGrid density;

  double atom_at(std::int64_t j) const {
    auto it = atoms.find(j);
    return it == atoms.end() ? 0.0 : it->second;
  }
  double position(std::int64_t j) const { return atom_spacing * static_cast<double>(j); }
  bool pure_atoms() const { return density.empty(); }

  // closed interval outside which the density vanishes; (0,0) when empty
  std::pair<double, double> density_support() const;
};

// Signed mass M((-inf, t]) tabulated right-continuously, with the atoms
// listed separately so jumps can be handled exactly downstream.
struct CumulativeTable {
  std::vector<double> ts;
  std::vector<double> values;
  std::vector<std::pair<double, double>> atom_list; // (location, mass), ascending
};

double mass(const SignedMeasure& m);
double total_variation(const SignedMeasure& m);

SignedMeasure scaled(SignedMeasure m, double c);

SignedMeasure reflect(const SignedMeasure& m);

// m1 * m2. Pitches must match; when a density is shifted by an atom the
// lattice pitch must be an integer multiple of the density step so the
// shifted grid stays aligned.
SignedMeasure convolve(const SignedMeasure& m1, const SignedMeasure& m2);

// sum_{k=0..K} m^{*k} scale^k / k!, K chosen from the total-variation
// tail bound so the dropped tail is below tol in total variation.
SignedMeasure conv_exp(const SignedMeasure& m, double scale, double tol);

CumulativeTable cumulative(const SignedMeasure& m, const std::vector<double>& ts);

// point evaluations used by the covariance machinery
double measure_cdf(const SignedMeasure& m, double t);        // M((-inf, t])
double measure_upper_tail(const SignedMeasure& m, double y); // M([y, inf))
double atom_mass_near(const SignedMeasure& m, double x);     // atom within lattice slack, else 0

// drop atoms with |mass| below threshold
void prune_atoms(SignedMeasure& m, double threshold);

// comparison slack for positions on the lattice, relative to the pitch
inline double lattice_slack(double atom_spacing) { return 1e-9 * atom_spacing; }

} // namespace cpd
