#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "cpd/measure.hpp"

namespace cpd {

// Compound Poisson model with drift: increments over spacing delta are
// gamma*delta plus a Poisson(lambda*delta) number of jumps drawn from the
// normalized jump measure. Jumps live on the atom lattice plus an
// absolutely continuous part.
struct LevyTriple {
  double gamma = 0.0;
  double lambda_ = 1.0;
  double atom_spacing = 1.0;
  std::map<std::int64_t, double> discrete_weights; // j != 0 -> q_j >= 0
  DensityGrid ac_density;                          // nonnegative, may be empty

  double p_total() const; // fraction of intensity carried by the atoms
};

struct IncrementSample {
  double delta = 1.0;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

struct AssumptionReport {
  bool mass_condition = false;
  bool no_origin_atom = false;
  bool nonnegative_weights = false;
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_moment = 0.0; // integral of |x|^alpha against the jump measure
  double log_moment = 0.0;   // integral of log^beta(max(|x|, e)) likewise
  bool log_moment_finite = false;

  bool pass() const {
    return mass_condition && no_origin_atom && nonnegative_weights && log_moment_finite;
  }
};

// throws Errc::config if the mass condition, origin rule, or sign rule fails
void validate_triple(const LevyTriple& triple);

// the jump intensity measure as a SignedMeasure (atoms q_j plus AC part)
SignedMeasure levy_measure(const LevyTriple& triple);

std::complex<double> nu_fourier(const LevyTriple& triple, double u);
std::complex<double> char_fn(const LevyTriple& triple, double delta, double u);

double true_N(const LevyTriple& triple, double t);
double true_F(const LevyTriple& triple, double t);

IncrementSample simulate(const LevyTriple& triple, double delta, std::size_t n,
                         std::uint64_t seed);

AssumptionReport validate_assumptions(const LevyTriple& triple, double alpha, double beta);

} // namespace cpd
