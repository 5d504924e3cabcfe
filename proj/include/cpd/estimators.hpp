#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "cpd/spectral.hpp"

namespace cpd {

// Deterministic schedules driving every estimator; all rates are functions
// of the sample size only. Exponents follow the narrow-bandwidth regime:
// h_n = c_h exp(-n^th_h), eps_n = c_eps exp(-n^th_eps),
// H_n = c_H exp(n^th_H) snapped to a lattice midpoint, Ht_n = c_Ht n^th_Ht.
struct SpectralConfig {
  double th_h = 0.20;
  double th_eps = 0.10;
  double th_H = 0.15;
  double th_Ht = 0.25;
  double c_h = 1.0;
  double c_eps = 1.0;
  double c_H = 1.0;
  double c_Ht = 1.0;
  double kernel_u0 = 0.5;
  double oversample = 16.0;
  double kappa = 0.0; // 0 -> derived from the naive intensity at run time
  double atom_spacing = 1.0;
  double gamma_hint = 0.0; // drift value used to locate no-jump increments
  double alpha = 8.0;      // tail exponent backing the rate constraints
  double beta = 2.0;       // log-moment exponent (regime b only)
  char regime = 'a';
  bool isotonic_F = false;
};

void validate_config(const SpectralConfig& config);

struct Schedule {
  double h = 0.0;
  double eps_n = 0.0;
  double H = 0.0;  // snapped to pitch*(m+1/2)
  double Ht = 0.0;
  std::int64_t window = 0; // atom indices searched: 0 < |j| <= window
};

Schedule schedule_at(const SpectralConfig& config, std::size_t n);

// step function on evaluation points with the lattice jump locations listed
struct StepFn {
  std::vector<double> ts;
  std::vector<double> values;
  std::vector<double> jump_locations;
};

struct Diagnostics {
  double remainder_sup = 0.0; // sup |phi_n / phi_model - 1| on a coarse subgrid
  double kappa = 0.0;
  double kappa_margin = 0.0; // min |phi_n| on the grid minus kappa
  double min_abs_phi = 0.0;
  Schedule schedule;
  std::size_t grid_points = 0;
  double du = 0.0;
  std::size_t sample_size = 0;
  double delta = 0.0;
};

struct EstimateSet {
  double lambda_hat = 0.0;
  double gamma_hat = 0.0;
  std::map<std::int64_t, double> q_hat;
  std::map<std::int64_t, double> p_hat;
  double q_total_hat = 0.0;
  double p_total_hat = 0.0;
  StepFn N_hat;
  StepFn F_hat;
  Diagnostics diagnostics;
};

// everything shared between the estimators of one sample: grid, log path,
// kernel, schedule. Building it runs the ECF and the distinguished log.
struct SpectralContext {
  double delta = 1.0;
  std::size_t n = 0;
  FrequencyGrid grid;
  ComplexVec logvals;
  KernelSpec kernel;
  Schedule sched;
  SpectralConfig config;
  Diagnostics diag;
};

SpectralContext make_context(const IncrementSample& sample, const SpectralConfig& config);

// replaces the log path by the analytic one for the given model; used to
// isolate bias from sampling noise
SpectralContext make_oracle_context(const LevyTriple& triple, double delta, std::size_t n,
                                    const SpectralConfig& config);

double ctx_lambda(const SpectralContext& ctx);
double ctx_gamma(const SpectralContext& ctx);
double ctx_qj(const SpectralContext& ctx, std::int64_t j); // IndexOutOfWindow
StepFn ctx_N(const SpectralContext& ctx, const std::vector<double>& ts);

std::optional<double> naive_lambda(const IncrementSample& sample, double delta,
                                   double gamma_hint);

double estimate_lambda(const IncrementSample& sample, const SpectralConfig& config);
double estimate_gamma(const IncrementSample& sample, const SpectralConfig& config);
double estimate_qj(const IncrementSample& sample, const SpectralConfig& config,
                   std::int64_t j);
double estimate_q(const IncrementSample& sample, const SpectralConfig& config);
StepFn estimate_N(const IncrementSample& sample, const SpectralConfig& config,
                  const std::vector<double>& ts);
StepFn estimate_F(const IncrementSample& sample, const SpectralConfig& config,
                  const std::vector<double>& ts);

// full set over the window plus N/F on the given evaluation points
EstimateSet estimate_all(const IncrementSample& sample, const SpectralConfig& config,
                         const std::vector<double>& ts);

} // namespace cpd
