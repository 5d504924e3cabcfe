#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "cpd/errors.hpp"
#include "cpd/harness.hpp"
#include "cpd/serialize.hpp"

namespace {

std::string errors_path_for(const std::string& out) {
  const std::string suffix = ".json";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
    return out.substr(0, out.size() - suffix.size()) + ".errors.csv";
  return out + ".errors.csv";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonparametric decomposition of discretely observed compound Poisson data"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw increments from a model file");
  std::string sim_model, sim_out;
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 1;
  sim->add_option("--model", sim_model, "model JSON file")->required();
  sim->add_option("-n,--count", sim_n, "number of increments")->required();
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "output CSV path")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "run the spectral estimators on increments");
  std::string est_data, est_config, est_out;
  est->add_option("--data", est_data, "increments CSV")->required();
  est->add_option("--config", est_config, "estimation settings JSON");
  est->add_option("--out", est_out, "output JSON path")->required();

  // oracle
  auto* ora = app.add_subcommand("oracle", "limiting covariances for a model file");
  std::string ora_model, ora_out;
  double ora_tol = 1e-10;
  ora->add_option("--model", ora_model, "model JSON file")->required();
  ora->add_option("--tol", ora_tol, "series truncation tolerance");
  ora->add_option("--out", ora_out, "output JSON path")->required();

  // montecarlo
  auto* mc = app.add_subcommand("montecarlo", "replicate a plan and summarize the errors");
  std::string mc_plan, mc_out;
  unsigned mc_threads = 1;
  std::uint64_t mc_seed = 0;
  bool mc_seed_given = false;
  mc->add_option("--plan", mc_plan, "experiment plan JSON")->required();
  mc->add_option("--threads", mc_threads, "worker threads");
  mc->add_option("--seed", mc_seed, "override the plan's master seed")
      ->each([&](const std::string&) { mc_seed_given = true; });
  mc->add_option("--out", mc_out, "report JSON path")->required();

  // bands
  auto* bnd = app.add_subcommand("bands", "confidence bands for the jump distribution");
  std::string bnd_est, bnd_oracle, bnd_out;
  double bnd_level = 0.95;
  bnd->add_option("--estimates", bnd_est, "estimates JSON from the estimate subcommand")
      ->required();
  bnd->add_option("--oracle", bnd_oracle, "covariance report JSON from the oracle subcommand")
      ->required();
  bnd->add_option("--level", bnd_level, "confidence level");
  bnd->add_option("--out", bnd_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      cpd::ModelSpec spec = cpd::load_model(sim_model);
      cpd::IncrementSample sample = cpd::simulate(spec.triple, spec.delta, sim_n, sim_seed);
      cpd::save_increments(sample, sim_out);
      std::printf("wrote %zu increments to %s\n", sample.values.size(), sim_out.c_str());
    } else if (*est) {
      cpd::EstimateJob job;
      if (!est_config.empty()) {
        job = cpd::load_estimate_job(est_config);
      } else {
        for (double t : cpd::default_level_grid(job.config.atom_spacing))
          if (std::isfinite(t)) job.ts.push_back(t);
      }
      cpd::IncrementSample sample = cpd::load_increments(est_data, job.delta);
      cpd::EstimateSet result = cpd::estimate_all(sample, job.config, job.ts);
      cpd::save_estimates(result, est_out);
      std::printf("lambda_hat %.17g\n", result.lambda_hat);
      std::printf("gamma_hat %.17g\n", result.gamma_hat);
      std::printf("p_total_hat %.17g\n", result.p_total_hat);
    } else if (*ora) {
      cpd::ModelSpec spec = cpd::load_model(ora_model);
      std::vector<double> ts = cpd::default_level_grid(spec.triple.atom_spacing);
      cpd::CovarianceReport report =
          cpd::covariance_report(spec.triple, spec.delta, ts, ora_tol);
      cpd::save_covariance_report(report, ora_out);
      cpd::save_matrix_csv(report.exact.SigmaN, report.ts, ora_out + ".SigmaN.csv");
      cpd::save_matrix_csv(report.exact.SigmaF, report.ts, ora_out + ".SigmaF.csv");
      std::printf("sigma2_lambda %.17g\n", report.exact.sigma2_lambda);
      std::printf("sigma2_q %.17g\n", report.exact.sigma2_q);
      std::printf("sigma2_p %.17g\n", report.exact.sigma2_p);
    } else if (*mc) {
      cpd::ExperimentPlan plan = cpd::load_plan(mc_plan);
      if (mc_seed_given) plan.master_seed = mc_seed;
      cpd::MCReport report = cpd::run_montecarlo(plan, mc_threads);
      cpd::save_mc_report(report, mc_out);
      cpd::save_errors_csv(report, errors_path_for(mc_out));
      for (const auto& tr : report.results)
        std::printf("%s n=%zu mean %.6g var %.6g ks_p %.4g coverage %.4g refusals %zu\n",
                    tr.target.c_str(), tr.n, tr.mean_scaled, tr.var_scaled, tr.ks_pvalue,
                    tr.coverage95, tr.refusals);
    } else if (*bnd) {
      cpd::EstimateSet estimates = cpd::load_estimates(bnd_est);
      cpd::CovarianceReport report = cpd::load_covariance_report(bnd_oracle);
      cpd::BandReport bands = cpd::build_bands(estimates, report, bnd_level);
      cpd::save_bands_csv(bands, bnd_out);
      std::printf("sup_radius %.17g over %zu points\n", bands.sup_radius, bands.ts.size());
    }
  } catch (const cpd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
