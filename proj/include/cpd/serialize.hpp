#pragma once

#include <string>
#include <vector>

#include "cpd/asymptotics.hpp"
#include "cpd/estimators.hpp"
#include "cpd/model.hpp"

namespace cpd {

// Model file: a LevyTriple bundled with the observation spacing. JSON fields
// are {gamma, lambda, delta, atom_spacing, atoms: [{j, q}], ac: {grid_origin,
// step, values}}.
struct ModelSpec {
  LevyTriple triple;
  double delta = 1.0;
};

// Settings consumed by the estimate subcommand: spectral configuration plus
// the observation spacing and the evaluation points for the step estimates.
struct EstimateJob {
  double delta = 1.0;
  SpectralConfig config;
  std::vector<double> ts;
};

// File helpers throw Errc::io when the filesystem misbehaves and
// Errc::config when the content does not parse or fails validation.
std::string read_text(const std::string& path);
void write_text_atomic(const std::string& path, const std::string& content);

ModelSpec load_model(const std::string& path);
void save_model(const ModelSpec& spec, const std::string& path);
ModelSpec model_from_text(const std::string& text);
std::string model_to_text(const ModelSpec& spec);

EstimateJob load_estimate_job(const std::string& path);
void save_estimate_job(const EstimateJob& job, const std::string& path);

SpectralConfig config_from_text(const std::string& text);
std::string config_to_text(const SpectralConfig& config);

void save_estimates(const EstimateSet& est, const std::string& path);
EstimateSet load_estimates(const std::string& path);

void save_covariance_report(const CovarianceReport& report, const std::string& path);
CovarianceReport load_covariance_report(const std::string& path);

// square matrix indexed by the evaluation points on both axes
void save_matrix_csv(const Eigen::MatrixXd& m, const std::vector<double>& ts,
                     const std::string& path);

// single-column CSV with header "z"
void save_increments(const IncrementSample& sample, const std::string& path);
IncrementSample load_increments(const std::string& path, double delta);

// shortest round-trip representation; infinities print as inf/-inf
std::string format_double(double x);

} // namespace cpd
