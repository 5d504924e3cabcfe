#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpd/serialize.hpp"

namespace cpd {

// Monte Carlo experiment description. Targets name which estimators to
// track: "lambda", "gamma", "q", "p", "qj:<j>", "pj:<j>", "N:<t>", "F:<t>".
struct ExperimentPlan {
  ModelSpec model;
  std::vector<std::size_t> sample_sizes;
  std::size_t replicates = 1;
  std::uint64_t master_seed = 1;
  SpectralConfig config;
  std::vector<std::string> targets;
  std::vector<double> ts;  // extra evaluation points for the step estimates
  double tol = 1e-10;      // series tolerance for the limiting covariances
};

// Scaled error statistics for one target at one sample size. The scaled
// error is sqrt(n)*(est - true) except for the drift, which is additionally
// divided by the bandwidth h_n.
struct TargetResult {
  std::string target;
  std::size_t n = 0;
  double true_value = 0.0;
  double oracle_variance = 0.0; // NaN when no limiting variance applies
  double mean_scaled = 0.0;
  double var_scaled = 0.0;      // NaN when fewer than two replicates survive
  double ks_stat = 0.0;
  double ks_pvalue = 0.0;
  bool ks_degenerate = false;   // too few replicates or no usable variance
  std::size_t refusals = 0;
  std::size_t count = 0;        // count + refusals == replicates
  double coverage95 = 0.0;      // two-sided 95% oracle interval coverage
};

// Per-replicate sup-norm statistics sqrt(n)*sup_t |est - true| over the
// evaluation grid, one block per step-estimate family present in the plan.
struct SupSamples {
  std::string family; // "N" or "F"
  std::size_t n = 0;
  std::vector<double> values;
};

struct MCReport {
  double delta = 0.0;
  std::size_t replicates = 0;
  std::uint64_t master_seed = 0;
  std::vector<TargetResult> results;
  std::vector<SupSamples> sup_stats;

  struct ErrRow {
    std::size_t replicate = 0;
    std::string target;
    std::size_t n = 0;
    double error = 0.0; // raw est - true
  };
  std::vector<ErrRow> errors;
};

// Runs the plan. Replicates are independent (seed derived from the master
// seed and the replicate index) and the reduction is done in replicate
// order, so the report is identical for any thread count. Refusals are
// tolerated per replicate; more than 20% refused at one sample size fails
// the whole run.
MCReport run_montecarlo(const ExperimentPlan& plan, unsigned threads = 1);

ExperimentPlan load_plan(const std::string& path);
void save_plan(const ExperimentPlan& plan, const std::string& path);
void save_mc_report(const MCReport& report, const std::string& path);
// columns replicate,target,n,error; refused replicates contribute no rows
void save_errors_csv(const MCReport& report, const std::string& path);

// Confidence bands for the jump distribution estimate on the finite
// evaluation points of the covariance report. Pointwise half-width is
// z*sqrt(Sigma_tt/n); the sup band is calibrated by simulating the limiting
// Gaussian field (fixed internal seed, 10^4 draws).
struct BandReport {
  double level = 0.95;
  std::size_t n = 0;
  std::vector<double> ts;
  std::vector<double> center;
  std::vector<double> pointwise_lo;
  std::vector<double> pointwise_hi;
  double sup_radius = 0.0;
  std::vector<double> sup_lo;
  std::vector<double> sup_hi;
};

BandReport build_bands(const EstimateSet& est, const CovarianceReport& report, double level);
void save_bands_csv(const BandReport& bands, const std::string& path);

// z-tests of the two structural hypotheses: no discrete part (q = 0) and no
// absolutely continuous part (p = 1).
struct ComponentDecision {
  std::string hypothesis;
  double statistic = 0.0;
  double p_value = 0.0;
  bool reject = false;
};

std::vector<ComponentDecision> component_tests(const EstimateSet& est,
                                               const CovarianceReport& report, double level);

} // namespace cpd
