#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cpd/measure.hpp"
#include "cpd/model.hpp"

namespace cpd {

// Limiting laws of one increment: P is the law of Z and Phi the signed
// measure whose Fourier transform is 1/phi(-u). Both are stored in the
// zero-drift frame; drift_shift records the common translation gamma*delta.
struct LimitLawPair {
  SignedMeasure P;
  SignedMeasure Phi;
  double drift_shift = 0.0;
  double tol = 0.0;
};

LimitLawPair limit_laws(const LevyTriple& triple, double delta, double tol);

// Weight functions of the limiting covariance functional. The catalog is
// closed: every weight expands into the four primitives below with
// coefficients, which is what makes atom evaluation exact.
enum class Primitive { one, point, half, lattice };

struct WeightTerm {
  Primitive kind = Primitive::one;
  double coef = 1.0;
  double param = 0.0; // point position or half-line level
};

struct WeightSpec {
  std::string name;
  std::vector<WeightTerm> terms;
  double pitch = 1.0; // lattice pitch backing point/lattice terms
};

WeightSpec weight_intensity();                                      // for lambda
WeightSpec weight_atom(const LevyTriple& t, std::int64_t j);        // for q_j
WeightSpec weight_atom_rel(const LevyTriple& t, std::int64_t j);    // for p_j
WeightSpec weight_atom_window(const LevyTriple& t);                 // for q
WeightSpec weight_atom_window_rel(const LevyTriple& t);             // for p
WeightSpec weight_level(double level);                              // for N(t)
WeightSpec weight_level_rel(const LevyTriple& t, double level);     // for F(t)

// pointwise value of the weight (used by the first-order expansion)
double weight_value(const WeightSpec& w, double x);

// delta^{-2} * int (f1*Phi)(f2*Phi) dP, atoms exact, density by panel
// midpoints split at the discontinuity offsets
double covariance_functional(const WeightSpec& f1, const WeightSpec& f2,
                             const LimitLawPair& laws, double delta);

struct SigmaLambdaSplit {
  double origin_term = 0.0;  // (P({0}) Phi({0})^2 - 1)/delta^2
  double lattice_term = 0.0; // delta^{-2} sum_{j!=0} P({ej}) Phi({ej})^2
  double total() const { return origin_term + lattice_term; }
};

// requires the zero-drift frame; NonzeroDrift otherwise
SigmaLambdaSplit sigma_lambda_decomposition(const LimitLawPair& laws, double delta);

// first-order expansion of the covariance functional in lambda*delta
double small_lambda_delta(const WeightSpec& f1, const WeightSpec& f2,
                          const LevyTriple& triple, double delta);

Eigen::MatrixXd covariance_matrix(const std::vector<WeightSpec>& weights,
                                  const LimitLawPair& laws, double delta);

struct CovarianceValues {
  double sigma2_lambda = 0.0;
  std::map<std::int64_t, double> sigma2_qj;
  std::map<std::int64_t, double> sigma2_pj;
  double sigma2_q = 0.0;
  double sigma2_p = 0.0;
  Eigen::MatrixXd SigmaN;
  Eigen::MatrixXd SigmaF;
};

struct CovarianceReport {
  double delta = 0.0;
  double tol = 0.0;
  std::vector<double> ts; // evaluation points incl. +-infinity sentinels
  CovarianceValues exact;
  CovarianceValues first_order;
};

// default evaluation grid: 41 points over [-5*pitch, 5*pitch] plus +-inf
std::vector<double> default_level_grid(double pitch);

CovarianceReport covariance_report(const LevyTriple& triple, double delta,
                                   const std::vector<double>& ts, double tol);

} // namespace cpd
