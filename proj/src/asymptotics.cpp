#include "cpd/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpd/errors.hpp"

namespace cpd {

namespace {

void check_catalog(const WeightSpec& w) {
  if (w.terms.empty()) fail(Errc::unsupported_weight, "empty weight specification");
  for (const WeightTerm& t : w.terms) {
    switch (t.kind) {
      case Primitive::one:
      case Primitive::point:
      case Primitive::half:
      case Primitive::lattice:
        break;
      default:
        fail(Errc::unsupported_weight, "weight term outside the closed catalog");
    }
    if (!std::isfinite(t.coef)) fail(Errc::unsupported_weight, "non-finite weight coefficient");
  }
  if (!(w.pitch > 0.0)) fail(Errc::unsupported_weight, "weight lattice pitch must be positive");
}

bool on_lattice(double x, double pitch) {
  double j = std::round(x / pitch);
  return std::abs(x - j * pitch) <= lattice_slack(pitch);
}

double phi_atom_total(const SignedMeasure& phi) {
  double s = 0.0;
  for (const auto& [j, w] : phi.atoms) s += w;
  return s;
}

// (w * Phi)(x) with every term contributing; exact at atoms
double conv_with_phi(const WeightSpec& w, const SignedMeasure& phi, double phi_mass,
                     double phi_atoms, double x) {
  double s = 0.0;
  for (const WeightTerm& t : w.terms) {
    switch (t.kind) {
      case Primitive::one:
        s += t.coef * phi_mass;
        break;
      case Primitive::point:
        s += t.coef * atom_mass_near(phi, x - t.param);
        break;
      case Primitive::half:
        s += t.coef * measure_upper_tail(phi, x - t.param);
        break;
      case Primitive::lattice:
        if (on_lattice(x, w.pitch)) s += t.coef * phi_atoms;
        break;
    }
  }
  return s;
}

// same, but only the terms that survive almost everywhere (for integration
// against the absolutely continuous part of P)
double conv_with_phi_ac(const WeightSpec& w, const SignedMeasure& phi, double phi_mass,
                        double x) {
  double s = 0.0;
  for (const WeightTerm& t : w.terms) {
    switch (t.kind) {
      case Primitive::one:
        s += t.coef * phi_mass;
        break;
      case Primitive::half:
        s += t.coef * measure_upper_tail(phi, x - t.param);
        break;
      case Primitive::point:
      case Primitive::lattice:
        break; // carried entirely by the atoms of P
    }
  }
  return s;
}

// breakpoints of x -> (w*Phi)(x) restricted to the a.e. terms: each
// half-line level shifted by every Phi atom (and the density edges)
void collect_breaks(const WeightSpec& w, const SignedMeasure& phi, double lo, double hi,
                    std::vector<double>& breaks) {
  for (const WeightTerm& t : w.terms) {
    if (t.kind != Primitive::half || std::isinf(t.param)) continue;
    for (const auto& [j, mass_j] : phi.atoms) {
      double x = t.param + phi.position(j);
      if (x > lo && x < hi) breaks.push_back(x);
    }
    if (!phi.density.empty()) {
      for (double edge : {phi.density.origin, phi.density.span_end()}) {
        double x = t.param + edge;
        if (x > lo && x < hi) breaks.push_back(x);
      }
    }
  }
}

double density_interp(const DensityGrid& g, double x) {
  if (g.size() < 2) return 0.0;
  double u = (x - g.origin) / g.step;
  if (u < 0.0 || u > static_cast<double>(g.size() - 1)) return 0.0;
  auto i = static_cast<std::size_t>(u);
  if (i >= g.size() - 1) i = g.size() - 2;
  double s = u - static_cast<double>(i);
  return g.values[i] + s * (g.values[i + 1] - g.values[i]);
}

double true_F_of(const LevyTriple& t, double level) {
  if (std::isinf(level)) return level > 0 ? 1.0 : 0.0;
  return true_F(t, level);
}

} // namespace

LimitLawPair limit_laws(const LevyTriple& triple, double delta, double tol) {
  if (!(tol > 0.0)) fail(Errc::config, "series tolerance must be positive");
  validate_triple(triple);
  SignedMeasure nu = levy_measure(triple);
  double mu = triple.lambda_ * delta;
  LimitLawPair laws;
  laws.P = scaled(conv_exp(nu, delta, tol), std::exp(-mu));
  laws.Phi = scaled(conv_exp(reflect(nu), -delta, tol), std::exp(mu));
  laws.drift_shift = triple.gamma * delta;
  laws.tol = tol;
  return laws;
}

WeightSpec weight_intensity() {
  WeightSpec w;
  w.name = "lambda";
  w.terms = {{Primitive::one, 1.0, 0.0}, {Primitive::point, -1.0, 0.0}};
  return w;
}

WeightSpec weight_atom(const LevyTriple& t, std::int64_t j) {
  if (j == 0) fail(Errc::unsupported_weight, "atom weight needs a nonzero index");
  WeightSpec w;
  w.name = "q_" + std::to_string(j);
  w.pitch = t.atom_spacing;
  w.terms = {{Primitive::point, 1.0, t.atom_spacing * static_cast<double>(j)}};
  return w;
}

WeightSpec weight_atom_rel(const LevyTriple& t, std::int64_t j) {
  if (j == 0) fail(Errc::unsupported_weight, "atom weight needs a nonzero index");
  auto it = t.discrete_weights.find(j);
  double pj = (it == t.discrete_weights.end() ? 0.0 : it->second) / t.lambda_;
  double inv = 1.0 / t.lambda_;
  WeightSpec w;
  w.name = "p_" + std::to_string(j);
  w.pitch = t.atom_spacing;
  w.terms = {{Primitive::point, inv, t.atom_spacing * static_cast<double>(j)},
             {Primitive::one, -pj * inv, 0.0},
             {Primitive::point, pj * inv, 0.0}};
  return w;
}

WeightSpec weight_atom_window(const LevyTriple& t) {
  WeightSpec w;
  w.name = "q";
  w.pitch = t.atom_spacing;
  w.terms = {{Primitive::lattice, 1.0, 0.0}, {Primitive::point, -1.0, 0.0}};
  return w;
}

WeightSpec weight_atom_window_rel(const LevyTriple& t) {
  double p = t.p_total();
  double inv = 1.0 / t.lambda_;
  WeightSpec w;
  w.name = "p";
  w.pitch = t.atom_spacing;
  w.terms = {{Primitive::lattice, inv, 0.0},
             {Primitive::point, -inv, 0.0},
             {Primitive::one, -p * inv, 0.0},
             {Primitive::point, p * inv, 0.0}};
  return w;
}

WeightSpec weight_level(double level) {
  WeightSpec w;
  w.name = "N";
  w.terms = {{Primitive::half, 1.0, level}};
  if (level >= 0.0) w.terms.push_back({Primitive::point, -1.0, 0.0});
  return w;
}

WeightSpec weight_level_rel(const LevyTriple& t, double level) {
  double f = true_F_of(t, level);
  double inv = 1.0 / t.lambda_;
  WeightSpec w;
  w.name = "F";
  w.pitch = t.atom_spacing;
  w.terms = {{Primitive::half, inv, level}};
  if (level >= 0.0) w.terms.push_back({Primitive::point, -inv, 0.0});
  // subtract F(t) times the intensity weight
  w.terms.push_back({Primitive::one, -f * inv, 0.0});
  w.terms.push_back({Primitive::point, f * inv, 0.0});
  return w;
}

double weight_value(const WeightSpec& w, double x) {
  check_catalog(w);
  double s = 0.0;
  for (const WeightTerm& t : w.terms) {
    switch (t.kind) {
      case Primitive::one:
        s += t.coef;
        break;
      case Primitive::point:
        if (std::abs(x - t.param) <= lattice_slack(w.pitch)) s += t.coef;
        break;
      case Primitive::half:
        if (x <= t.param) s += t.coef;
        break;
      case Primitive::lattice:
        if (on_lattice(x, w.pitch)) s += t.coef;
        break;
    }
  }
  return s;
}

double covariance_functional(const WeightSpec& f1, const WeightSpec& f2,
                             const LimitLawPair& laws, double delta) {
  check_catalog(f1);
  check_catalog(f2);
  if (!(delta > 0.0)) fail(Errc::config, "observation spacing must be positive");
  const SignedMeasure& P = laws.P;
  const SignedMeasure& Phi = laws.Phi;
  double phi_mass = mass(Phi);
  double phi_atoms = phi_atom_total(Phi);

  double acc = 0.0;
  for (const auto& [j, pj] : P.atoms) {
    double x = P.position(j);
    acc += pj * conv_with_phi(f1, Phi, phi_mass, phi_atoms, x) *
           conv_with_phi(f2, Phi, phi_mass, phi_atoms, x);
  }

  const DensityGrid& g = P.density;
  if (g.size() >= 2) {
    for (std::size_t l = 0; l + 1 < g.size(); ++l) {
      double lo = g.x(l);
      double hi = g.x(l + 1);
      std::vector<double> cuts{lo, hi};
      collect_breaks(f1, Phi, lo, hi, cuts);
      collect_breaks(f2, Phi, lo, hi, cuts);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double len = cuts[s + 1] - cuts[s];
        if (len <= 0.0) continue;
        double m = 0.5 * (cuts[s] + cuts[s + 1]);
        acc += len * density_interp(g, m) * conv_with_phi_ac(f1, Phi, phi_mass, m) *
               conv_with_phi_ac(f2, Phi, phi_mass, m);
      }
    }
  }
  return acc / (delta * delta);
}

SigmaLambdaSplit sigma_lambda_decomposition(const LimitLawPair& laws, double delta) {
  if (laws.drift_shift != 0.0)
    fail(Errc::nonzero_drift, "decomposition requires the zero-drift frame");
  SigmaLambdaSplit out;
  double d2 = delta * delta;
  double p0 = laws.P.atom_at(0);
  double phi0 = laws.Phi.atom_at(0);
  out.origin_term = (p0 * phi0 * phi0 - 1.0) / d2;
  double s = 0.0;
  for (const auto& [j, pj] : laws.P.atoms) {
    if (j == 0) continue;
    double ph = laws.Phi.atom_at(j);
    s += pj * ph * ph;
  }
  out.lattice_term = s / d2;
  return out;
}

namespace {

// integral of w1*w2 against the jump measure (w2 may be null for int w1 dnu)
double integrate_against(const WeightSpec& w1, const WeightSpec* w2,
                         const SignedMeasure& nu) {
  double acc = 0.0;
  for (const auto& [j, q] : nu.atoms) {
    double x = nu.position(j);
    double v = weight_value(w1, x);
    if (w2) v *= weight_value(*w2, x);
    acc += q * v;
  }
  const DensityGrid& g = nu.density;
  if (g.size() >= 2) {
    std::vector<double> half_levels;
    for (const WeightTerm& t : w1.terms)
      if (t.kind == Primitive::half && !std::isinf(t.param)) half_levels.push_back(t.param);
    if (w2)
      for (const WeightTerm& t : w2->terms)
        if (t.kind == Primitive::half && !std::isinf(t.param)) half_levels.push_back(t.param);
    for (std::size_t l = 0; l + 1 < g.size(); ++l) {
      double lo = g.x(l);
      double hi = g.x(l + 1);
      std::vector<double> cuts{lo, hi};
      for (double c : half_levels)
        if (c > lo && c < hi) cuts.push_back(c);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double len = cuts[s + 1] - cuts[s];
        if (len <= 0.0) continue;
        double m = 0.5 * (cuts[s] + cuts[s + 1]);
        // point/lattice terms carry no a.e. mass against a density
        double v1 = 0.0;
        for (const WeightTerm& t : w1.terms) {
          if (t.kind == Primitive::one) v1 += t.coef;
          if (t.kind == Primitive::half && m <= t.param) v1 += t.coef;
        }
        double v = v1;
        if (w2) {
          double v2 = 0.0;
          for (const WeightTerm& t : w2->terms) {
            if (t.kind == Primitive::one) v2 += t.coef;
            if (t.kind == Primitive::half && m <= t.param) v2 += t.coef;
          }
          v *= v2;
        }
        acc += len * density_interp(g, m) * v;
      }
    }
  }
  return acc;
}

} // namespace

double small_lambda_delta(const WeightSpec& f1, const WeightSpec& f2,
                          const LevyTriple& triple, double delta) {
  check_catalog(f1);
  check_catalog(f2);
  SignedMeasure nu = levy_measure(triple);
  double f10 = weight_value(f1, 0.0);
  double f20 = weight_value(f2, 0.0);
  double cross = integrate_against(f1, &f2, nu);
  double int1 = integrate_against(f1, nullptr, nu);
  double int2 = integrate_against(f2, nullptr, nu);
  double first =
      f10 * f20 +
      delta * (cross - f10 * int2 - f20 * int1 + triple.lambda_ * f10 * f20);
  return first / (delta * delta);
}

Eigen::MatrixXd covariance_matrix(const std::vector<WeightSpec>& weights,
                                  const LimitLawPair& laws, double delta) {
  auto k = static_cast<Eigen::Index>(weights.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j) {
      double v = covariance_functional(weights[static_cast<std::size_t>(i)],
                                       weights[static_cast<std::size_t>(j)], laws, delta);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

std::vector<double> default_level_grid(double pitch) {
  std::vector<double> ts;
  ts.push_back(-std::numeric_limits<double>::infinity());
  for (int i = 0; i < 41; ++i) ts.push_back(pitch * (-5.0 + 0.25 * i));
  ts.push_back(std::numeric_limits<double>::infinity());
  return ts;
}

CovarianceReport covariance_report(const LevyTriple& triple, double delta,
                                   const std::vector<double>& ts, double tol) {
  validate_triple(triple);
  CovarianceReport rep;
  rep.delta = delta;
  rep.tol = tol;
  rep.ts = ts;
  LimitLawPair laws = limit_laws(triple, delta, tol);
  // covariances are drift-invariant; the series is built in the
  // zero-drift frame already
  laws.drift_shift = 0.0;

  WeightSpec w_l = weight_intensity();
  w_l.pitch = triple.atom_spacing;
  auto fill = [&](CovarianceValues& out, bool exact) {
    auto value = [&](const WeightSpec& a, const WeightSpec& b) {
      return exact ? covariance_functional(a, b, laws, delta)
                   : small_lambda_delta(a, b, triple, delta);
    };
    out.sigma2_lambda = value(w_l, w_l);
    for (const auto& [j, q] : triple.discrete_weights) {
      WeightSpec wq = weight_atom(triple, j);
      WeightSpec wp = weight_atom_rel(triple, j);
      out.sigma2_qj[j] = value(wq, wq);
      out.sigma2_pj[j] = value(wp, wp);
    }
    WeightSpec wq_all = weight_atom_window(triple);
    WeightSpec wp_all = weight_atom_window_rel(triple);
    out.sigma2_q = value(wq_all, wq_all);
    out.sigma2_p = value(wp_all, wp_all);
    auto k = static_cast<Eigen::Index>(ts.size());
    out.SigmaN.resize(k, k);
    out.SigmaF.resize(k, k);
    std::vector<WeightSpec> wn, wf;
    wn.reserve(ts.size());
    wf.reserve(ts.size());
    for (double t : ts) {
      wn.push_back(weight_level(t));
      wn.back().pitch = triple.atom_spacing;
      wf.push_back(weight_level_rel(triple, t));
    }
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i; j < k; ++j) {
        double vn = value(wn[static_cast<std::size_t>(i)], wn[static_cast<std::size_t>(j)]);
        double vf = value(wf[static_cast<std::size_t>(i)], wf[static_cast<std::size_t>(j)]);
        out.SigmaN(i, j) = vn;
        out.SigmaN(j, i) = vn;
        out.SigmaF(i, j) = vf;
        out.SigmaF(j, i) = vf;
      }
  };
  fill(rep.exact, true);
  fill(rep.first_order, false);
  return rep;
}

} // namespace cpd
