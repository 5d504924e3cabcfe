#include "cpd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpd/errors.hpp"

namespace cpd {

namespace {

constexpr double kLambdaFloor = 1e-8;

double naive_match_tol(double drift) { return 1e-12 * std::max(1.0, std::abs(drift)); }

// isotonic regression (pool adjacent violators), equal weights
std::vector<double> isotonic(const std::vector<double>& y) {
  std::vector<double> level;
  std::vector<std::size_t> width;
  for (double v : y) {
    level.push_back(v);
    width.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      double w1 = static_cast<double>(width[width.size() - 2]);
      double w2 = static_cast<double>(width.back());
      double merged = (level[level.size() - 2] * w1 + level.back() * w2) / (w1 + w2);
      level.pop_back();
      width.pop_back();
      level.back() = merged;
      width.back() += static_cast<std::size_t>(w2);
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (std::size_t b = 0; b < level.size(); ++b)
    out.insert(out.end(), width[b], level[b]);
  return out;
}

std::vector<double> level_jump_locations(const Schedule& s, double pitch) {
  std::vector<double> locs;
  auto m = static_cast<std::int64_t>(std::floor(s.H / pitch));
  for (std::int64_t j = -m; j <= m; ++j)
    if (j != 0) locs.push_back(pitch * static_cast<double>(j));
  return locs;
}

} // namespace

void validate_config(const SpectralConfig& config) {
  const SpectralConfig& c = config;
  if (!(c.atom_spacing > 0.0)) fail(Errc::config, "atom spacing must be positive");
  if (!(c.c_h > 0.0 && c.c_eps > 0.0 && c.c_H > 0.0 && c.c_Ht > 0.0))
    fail(Errc::config, "schedule constants must be positive");
  if (!(c.oversample >= 16.0)) fail(Errc::config, "oversampling factor must be at least 16");
  if (c.kappa < 0.0) fail(Errc::config, "kappa must be nonnegative");
  if (!(c.alpha > 0.0)) fail(Errc::config, "alpha must be positive");
  if (c.regime != 'a' && c.regime != 'b') fail(Errc::config, "regime must be 'a' or 'b'");
  // narrow-bandwidth rate constraints
  if (!(1.0 / c.alpha < 2.0 * c.th_eps))
    fail(Errc::config, "window exponent too small for the tail exponent alpha");
  if (!(2.0 * c.th_eps <= c.th_h)) fail(Errc::config, "bandwidth exponent below twice the window exponent");
  if (!(c.th_h < 0.25)) fail(Errc::config, "bandwidth exponent must be below 1/4");
  if (!(c.th_H < c.th_h)) fail(Errc::config, "cutoff exponent must be below the bandwidth exponent");
  if (!(c.th_Ht > 0.0)) fail(Errc::config, "search window exponent must be positive");
  if (c.regime == 'b') {
    if (!(c.beta > 0.0)) fail(Errc::config, "beta must be positive");
    if (!(c.th_Ht >= 1.0 / (2.0 * c.beta) && c.th_Ht < 0.5))
      fail(Errc::config, "search window exponent outside [1/(2 beta), 1/2)");
    if (!(c.th_h < (1.0 - 2.0 * c.th_Ht) / 4.0))
      fail(Errc::config, "bandwidth exponent too large for the search window growth");
  }
}

Schedule schedule_at(const SpectralConfig& config, std::size_t n) {
  if (n < 1) fail(Errc::config, "sample size must be at least 1");
  double nn = static_cast<double>(n);
  Schedule s;
  s.h = config.c_h * std::exp(-std::pow(nn, config.th_h));
  s.eps_n = config.c_eps * std::exp(-std::pow(nn, config.th_eps));
  s.Ht = config.c_Ht * std::pow(nn, config.th_Ht);
  double pitch = config.atom_spacing;
  if (!(s.eps_n < 0.5 * pitch))
    fail(Errc::config, "window half-width must stay below half the lattice pitch");
  // H snaps to the nearest lattice midpoint so the cutoff avoids the atoms
  double h_raw = config.c_H * std::exp(std::pow(nn, config.th_H));
  auto m = static_cast<std::int64_t>(std::llround(h_raw / pitch - 0.5));
  if (m < 1) m = 1;
  s.H = pitch * (static_cast<double>(m) + 0.5);
  s.window = static_cast<std::int64_t>(std::floor(s.Ht / pitch + 1e-9));
  return s;
}

std::optional<double> naive_lambda(const IncrementSample& sample, double delta,
                                   double gamma_hint) {
  if (sample.values.empty()) fail(Errc::config, "empty sample");
  double target = gamma_hint * delta;
  double tol = naive_match_tol(target);
  std::size_t hits = 0;
  for (double z : sample.values)
    if (std::abs(z - target) <= tol) ++hits;
  if (hits == 0) return std::nullopt;
  double frac = static_cast<double>(hits) / static_cast<double>(sample.values.size());
  return -std::log(frac) / delta;
}

SpectralContext make_context(const IncrementSample& sample, const SpectralConfig& config) {
  validate_config(config);
  if (sample.values.empty()) fail(Errc::config, "empty sample");
  if (!(sample.delta > 0.0)) fail(Errc::config, "observation spacing must be positive");

  SpectralContext ctx;
  ctx.delta = sample.delta;
  ctx.n = sample.values.size();
  ctx.config = config;
  ctx.kernel = make_kernel(config.kernel_u0);
  ctx.sched = schedule_at(config, ctx.n);
  ctx.grid = make_grid(ctx.sched.h, ctx.sched.H, config.oversample);

  ComplexVec phi = ecf(sample, ctx.grid);

  std::optional<double> prelim = naive_lambda(sample, ctx.delta, config.gamma_hint);
  double kappa = config.kappa;
  if (kappa <= 0.0)
    kappa = prelim ? 0.5 * std::exp(-2.0 * *prelim * ctx.delta) : 1e-4;

  double min_abs = std::numeric_limits<double>::infinity();
  for (const auto& v : phi) min_abs = std::min(min_abs, std::abs(v));

  ctx.logvals = distinguished_log(phi, ctx.grid, kappa);

  ctx.diag.kappa = kappa;
  ctx.diag.min_abs_phi = min_abs;
  ctx.diag.kappa_margin = min_abs - kappa;
  ctx.diag.schedule = ctx.sched;
  ctx.diag.grid_points = ctx.grid.count;
  ctx.diag.du = ctx.grid.du;
  ctx.diag.sample_size = ctx.n;
  ctx.diag.delta = ctx.delta;

  // remainder proxy: compare phi_n against the naive one-jump reconstruction
  // exp(lambda_pre*delta*(ecf of jumps - 1) + i*gamma_hint*delta*u)
  ctx.diag.remainder_sup = std::numeric_limits<double>::quiet_NaN();
  if (prelim) {
    double drift = config.gamma_hint * sample.delta;
    double tol = naive_match_tol(drift);
    std::vector<double> jumps;
    for (double z : sample.values)
      if (std::abs(z - drift) > tol) jumps.push_back(z - drift);
    if (!jumps.empty()) {
      double sup = 0.0;
      std::size_t stride = std::max<std::size_t>(1, ctx.grid.count / 257);
      for (std::size_t i = 0; i < ctx.grid.count; i += stride) {
        double u = ctx.grid.u(i);
        std::complex<double> ecf_j{0.0, 0.0};
        for (double x : jumps) ecf_j += std::complex<double>{std::cos(u * x), std::sin(u * x)};
        ecf_j /= static_cast<double>(jumps.size());
        std::complex<double> model =
            std::exp(*prelim * sample.delta * (ecf_j - 1.0) +
                     std::complex<double>{0.0, drift * u});
        sup = std::max(sup, std::abs(phi[i] / model - 1.0));
      }
      ctx.diag.remainder_sup = sup;
    }
  }
  return ctx;
}

SpectralContext make_oracle_context(const LevyTriple& triple, double delta, std::size_t n,
                                    const SpectralConfig& config) {
  validate_config(config);
  validate_triple(triple);
  if (!(delta > 0.0)) fail(Errc::config, "observation spacing must be positive");

  SpectralContext ctx;
  ctx.delta = delta;
  ctx.n = n;
  ctx.config = config;
  ctx.kernel = make_kernel(config.kernel_u0);
  ctx.sched = schedule_at(config, n);
  ctx.grid = make_grid(ctx.sched.h, ctx.sched.H, config.oversample);

  ctx.logvals.assign(ctx.grid.count, {0.0, 0.0});
  for (std::size_t k = 1; k <= ctx.grid.center; ++k) {
    double u = ctx.grid.du * static_cast<double>(k);
    std::complex<double> l =
        delta * (std::complex<double>{0.0, triple.gamma * u} + nu_fourier(triple, u) -
                 triple.lambda_);
    ctx.logvals[ctx.grid.center + k] = l;
    ctx.logvals[ctx.grid.center - k] = std::conj(l);
  }
  ctx.diag.schedule = ctx.sched;
  ctx.diag.grid_points = ctx.grid.count;
  ctx.diag.du = ctx.grid.du;
  ctx.diag.sample_size = ctx.n;
  ctx.diag.delta = ctx.delta;
  ctx.diag.remainder_sup = 0.0;
  return ctx;
}

double ctx_lambda(const SpectralContext& ctx) {
  FtWeight w = ft_weight_lambda(ctx.sched.eps_n, ctx.sched.H);
  return spectral_integral(w, ctx.logvals, ctx.grid, ctx.kernel, ctx.sched.h, ctx.delta);
}

double ctx_gamma(const SpectralContext& ctx) {
  FtWeight w = ft_weight_gamma(ctx.sched.h, ctx.kernel.c);
  return spectral_integral(w, ctx.logvals, ctx.grid, ctx.kernel, ctx.sched.h, ctx.delta);
}

double ctx_qj(const SpectralContext& ctx, std::int64_t j) {
  if (j == 0) fail(Errc::index_out_of_window, "atom index 0 is excluded");
  if (std::llabs(j) > ctx.sched.window)
    fail(Errc::index_out_of_window, "atom index outside the search window");
  double center = ctx.config.atom_spacing * static_cast<double>(j);
  FtWeight w = ft_weight_atom(center, ctx.sched.eps_n);
  return spectral_integral(w, ctx.logvals, ctx.grid, ctx.kernel, ctx.sched.h, ctx.delta);
}

StepFn ctx_N(const SpectralContext& ctx, const std::vector<double>& ts) {
  StepFn out;
  out.ts = ts;
  out.values.reserve(ts.size());
  for (double t : ts) {
    FtWeight w = ft_weight_level(t, ctx.config.atom_spacing, ctx.sched.eps_n, ctx.sched.H);
    out.values.push_back(
        spectral_integral(w, ctx.logvals, ctx.grid, ctx.kernel, ctx.sched.h, ctx.delta));
  }
  out.jump_locations = level_jump_locations(ctx.sched, ctx.config.atom_spacing);
  return out;
}

double estimate_lambda(const IncrementSample& sample, const SpectralConfig& config) {
  return ctx_lambda(make_context(sample, config));
}

double estimate_gamma(const IncrementSample& sample, const SpectralConfig& config) {
  return ctx_gamma(make_context(sample, config));
}

double estimate_qj(const IncrementSample& sample, const SpectralConfig& config,
                   std::int64_t j) {
  return ctx_qj(make_context(sample, config), j);
}

double estimate_q(const IncrementSample& sample, const SpectralConfig& config) {
  SpectralContext ctx = make_context(sample, config);
  double s = 0.0;
  for (std::int64_t j = -ctx.sched.window; j <= ctx.sched.window; ++j)
    if (j != 0) s += ctx_qj(ctx, j);
  return s;
}

StepFn estimate_N(const IncrementSample& sample, const SpectralConfig& config,
                  const std::vector<double>& ts) {
  return ctx_N(make_context(sample, config), ts);
}

StepFn estimate_F(const IncrementSample& sample, const SpectralConfig& config,
                  const std::vector<double>& ts) {
  SpectralContext ctx = make_context(sample, config);
  double lambda = ctx_lambda(ctx);
  if (std::abs(lambda) < kLambdaFloor)
    fail(Errc::division_by_near_zero, "intensity estimate too close to zero");
  StepFn f = ctx_N(ctx, ts);
  for (double& v : f.values) v /= lambda;
  if (config.isotonic_F) f.values = isotonic(f.values);
  return f;
}

EstimateSet estimate_all(const IncrementSample& sample, const SpectralConfig& config,
                         const std::vector<double>& ts) {
  SpectralContext ctx = make_context(sample, config);
  EstimateSet e;
  e.diagnostics = ctx.diag;
  e.lambda_hat = ctx_lambda(ctx);
  e.gamma_hat = ctx_gamma(ctx);
  e.q_total_hat = 0.0;
  for (std::int64_t j = -ctx.sched.window; j <= ctx.sched.window; ++j) {
    if (j == 0) continue;
    double q = ctx_qj(ctx, j);
    e.q_hat[j] = q;
    e.q_total_hat += q;
  }
  e.N_hat = ctx_N(ctx, ts);
  if (std::abs(e.lambda_hat) < kLambdaFloor)
    fail(Errc::division_by_near_zero, "intensity estimate too close to zero");
  e.F_hat = e.N_hat;
  for (double& v : e.F_hat.values) v /= e.lambda_hat;
  if (config.isotonic_F) e.F_hat.values = isotonic(e.F_hat.values);
  for (const auto& [j, q] : e.q_hat) e.p_hat[j] = q / e.lambda_hat;
  e.p_total_hat = e.q_total_hat / e.lambda_hat;
  return e;
}

} // namespace cpd
