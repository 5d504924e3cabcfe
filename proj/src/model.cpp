#include "cpd/model.hpp"

#include <algorithm>
#include <cmath>

#include "cpd/errors.hpp"
#include "cpd/stats.hpp"

namespace cpd {

namespace {

double ac_mass(const DensityGrid& g) {
  if (g.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : g.values) s += v;
  s -= 0.5 * (g.values.front() + g.values.back());
  return g.step * s;
}

// tables for drawing one jump: atom inverse CDF plus AC cell masses
struct JumpSampler {
  double p = 0.0; // probability the jump is an atom
  std::vector<double> atom_cum;       // normalized, ascending, last = 1
  std::vector<std::int64_t> atom_idx; // parallel to atom_cum
  const DensityGrid* ac = nullptr;
  std::vector<double> cell_cum; // normalized cumulative cell masses, last = 1

  explicit JumpSampler(const LevyTriple& t) {
    double q_sum = 0.0;
    for (const auto& [j, q] : t.discrete_weights) q_sum += q;
    p = q_sum / t.lambda_;
    double acc = 0.0;
    for (const auto& [j, q] : t.discrete_weights) {
      acc += q / q_sum;
      atom_cum.push_back(acc);
      atom_idx.push_back(j);
    }
    if (!atom_cum.empty()) atom_cum.back() = 1.0;
    ac = &t.ac_density;
    if (ac->size() >= 2) {
      double total = ac_mass(*ac);
      double c = 0.0;
      for (std::size_t i = 0; i + 1 < ac->size(); ++i) {
        c += 0.5 * ac->step * (ac->values[i] + ac->values[i + 1]) / total;
        cell_cum.push_back(c);
      }
      cell_cum.back() = 1.0;
    }
  }

  std::int64_t draw_atom(double w) const {
    auto it = std::upper_bound(atom_cum.begin(), atom_cum.end(), w);
    if (it == atom_cum.end()) --it;
    return atom_idx[static_cast<std::size_t>(it - atom_cum.begin())];
  }

  // inverse CDF of the normalized AC density, linear inside cells
  double draw_ac(double w) const {
    auto it = std::upper_bound(cell_cum.begin(), cell_cum.end(), w);
    if (it == cell_cum.end()) --it;
    auto i = static_cast<std::size_t>(it - cell_cum.begin());
    double lo = i == 0 ? 0.0 : cell_cum[i - 1];
    double cell = cell_cum[i] - lo;
    double s;
    if (cell <= 0.0) {
      s = 0.5;
    } else {
      // within the cell the CDF is s*vi + s^2*(vj - vi)/2 up to scale
      double vi = ac->values[i];
      double vj = ac->values[i + 1];
      double rem = (w - lo) / cell * (0.5 * (vi + vj));
      double a = 0.5 * (vj - vi);
      if (std::abs(a) < 1e-14 * std::max(std::abs(vi), 1e-300)) {
        s = rem / vi;
      } else {
        double disc = vi * vi + 4.0 * a * rem;
        s = (std::sqrt(std::max(disc, 0.0)) - vi) / (2.0 * a);
      }
      s = std::clamp(s, 0.0, 1.0);
    }
    return ac->origin + ac->step * (static_cast<double>(i) + s);
  }
};

int poisson_inversion(double mu, Rng64& rng) {
  double u = rng.uniform();
  double pk = std::exp(-mu);
  double cum = pk;
  int m = 0;
  while (u > cum) {
    ++m;
    pk *= mu / m;
    cum += pk;
    if (m > 4000) break; // unreachable for mu <= 30; caps pathological u
  }
  return m;
}

} // namespace

double LevyTriple::p_total() const {
  double q_sum = 0.0;
  for (const auto& [j, q] : discrete_weights) q_sum += q;
  return q_sum / lambda_;
}

void validate_triple(const LevyTriple& triple) {
  if (!(triple.lambda_ > 0.0)) fail(Errc::config, "intensity must be positive");
  if (!(triple.atom_spacing > 0.0)) fail(Errc::config, "atom spacing must be positive");
  double q_sum = 0.0;
  for (const auto& [j, q] : triple.discrete_weights) {
    if (j == 0) fail(Errc::config, "jump measure must not carry an atom at the origin");
    if (q < 0.0) fail(Errc::config, "atom weights must be nonnegative");
    if (q > triple.lambda_ * (1.0 + 1e-12))
      fail(Errc::config, "atom weight exceeds the total intensity");
    q_sum += q;
  }
  for (double v : triple.ac_density.values)
    if (v < 0.0) fail(Errc::config, "density values must be nonnegative");
  double total = q_sum + ac_mass(triple.ac_density);
  if (std::abs(total - triple.lambda_) > 1e-10 * std::max(1.0, triple.lambda_))
    fail(Errc::config, "jump measure mass does not match the intensity");
}

SignedMeasure levy_measure(const LevyTriple& triple) {
  SignedMeasure m;
  m.atom_spacing = triple.atom_spacing;
  m.atoms = triple.discrete_weights;
  m.density = triple.ac_density;
  return m;
}

std::complex<double> nu_fourier(const LevyTriple& triple, double u) {
  std::complex<double> s{0.0, 0.0};
  for (const auto& [j, q] : triple.discrete_weights) {
    double ux = u * triple.atom_spacing * static_cast<double>(j);
    s += q * std::complex<double>{std::cos(ux), std::sin(ux)};
  }
  const DensityGrid& g = triple.ac_density;
  if (g.size() >= 2) {
    std::complex<double> a{0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
      double w = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
      double ux = u * g.x(i);
      a += w * g.values[i] * std::complex<double>{std::cos(ux), std::sin(ux)};
    }
    s += g.step * a;
  }
  return s;
}

std::complex<double> char_fn(const LevyTriple& triple, double delta, double u) {
  std::complex<double> expo =
      delta * (std::complex<double>{0.0, triple.gamma * u} + nu_fourier(triple, u) -
               triple.lambda_);
  return std::exp(expo);
}

double true_N(const LevyTriple& triple, double t) {
  SignedMeasure m = levy_measure(triple);
  return measure_cdf(m, t);
}

double true_F(const LevyTriple& triple, double t) { return true_N(triple, t) / triple.lambda_; }

IncrementSample simulate(const LevyTriple& triple, double delta, std::size_t n,
                         std::uint64_t seed) {
  validate_triple(triple);
  if (n < 1) fail(Errc::config, "sample size must be at least 1");
  if (!(delta > 0.0)) fail(Errc::config, "observation spacing must be positive");
  double mu = triple.lambda_ * delta;
  if (mu > 30.0)
    fail(Errc::config, "lambda*delta exceeds 30; inversion sampling not supported");
  JumpSampler sampler(triple);
  double drift = triple.gamma * delta;

  IncrementSample out;
  out.delta = delta;
  out.seed = seed;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Rng64 rng = stream_rng(seed, k);
    int m = poisson_inversion(mu, rng);
    // lattice jumps are accumulated as integers so exact cancellations
    // land on gamma*delta bitwise
    std::int64_t lattice = 0;
    double ac_sum = 0.0;
    for (int i = 0; i < m; ++i) {
      double w = rng.uniform();
      if (w < sampler.p) {
        lattice += sampler.draw_atom(w / sampler.p);
      } else {
        ac_sum += sampler.draw_ac((w - sampler.p) / (1.0 - sampler.p));
      }
    }
    double z = drift;
    if (lattice != 0) z += triple.atom_spacing * static_cast<double>(lattice);
    z += ac_sum;
    out.values[k] = z;
  }
  return out;
}

AssumptionReport validate_assumptions(const LevyTriple& triple, double alpha, double beta) {
  AssumptionReport r;
  r.alpha = alpha;
  r.beta = beta;
  double q_sum = 0.0;
  r.no_origin_atom = true;
  r.nonnegative_weights = true;
  for (const auto& [j, q] : triple.discrete_weights) {
    if (j == 0 && q != 0.0) r.no_origin_atom = false;
    if (q < 0.0) r.nonnegative_weights = false;
    q_sum += q;
  }
  for (double v : triple.ac_density.values)
    if (v < 0.0) r.nonnegative_weights = false;
  double total = q_sum + ac_mass(triple.ac_density);
  r.mass_condition = std::abs(total - triple.lambda_) <= 1e-10 * std::max(1.0, triple.lambda_);

  auto log_w = [beta](double x) { return std::pow(std::log(std::max(std::abs(x), std::exp(1.0))), beta); };
  auto pow_w = [alpha](double x) { return std::pow(std::abs(x), alpha); };
  double lm = 0.0;
  double am = 0.0;
  for (const auto& [j, q] : triple.discrete_weights) {
    double x = triple.atom_spacing * static_cast<double>(j);
    lm += q * log_w(x);
    am += q * pow_w(x);
  }
  const DensityGrid& g = triple.ac_density;
  if (g.size() >= 2) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double w = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
      lm += g.step * w * g.values[i] * log_w(g.x(i));
      am += g.step * w * g.values[i] * pow_w(g.x(i));
    }
  }
  r.log_moment = lm;
  r.alpha_moment = am;
  r.log_moment_finite = std::isfinite(lm);
  return r;
}

} // namespace cpd
