#include "cpd/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "cpd/errors.hpp"

namespace cpd {

namespace {

constexpr std::size_t kMaxConvGrid = std::size_t{1} << 16;
constexpr std::size_t kMaxAccumGrid = std::size_t{1} << 20;

bool steps_match(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

double grid_end(const DensityGrid& g) { return g.span_end(); }

double trapezoid_mass(const DensityGrid& g) {
  if (g.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : g.values) s += v;
  s -= 0.5 * (g.values.front() + g.values.back());
  return g.step * s;
}

// integral of the linear interpolant over (-inf, t]
double trapezoid_cdf(const DensityGrid& g, double t) {
  if (g.size() < 2) return 0.0;
  if (t <= g.origin) return 0.0;
  double end = grid_end(g);
  if (t >= end) return trapezoid_mass(g);
  double u = (t - g.origin) / g.step;
  auto i = static_cast<std::size_t>(u);
  if (i >= g.size() - 1) i = g.size() - 2;
  double s = u - static_cast<double>(i);
  double acc = 0.0;
  for (std::size_t l = 0; l < i; ++l) acc += 0.5 * (g.values[l] + g.values[l + 1]);
  acc *= g.step;
  double vi = g.values[i];
  double vj = g.values[i + 1];
  acc += g.step * s * (vi + 0.5 * s * (vj - vi));
  return acc;
}

void scale_grid(DensityGrid& g, double c) {
  for (double& v : g.values) v *= c;
}

// linear interpolant of g at x, zero outside the sampled span
double grid_interp(const DensityGrid& g, double x) {
  if (g.empty()) return 0.0;
  if (g.size() == 1) return 0.0;
  double u = (x - g.origin) / g.step;
  if (u < 0.0 || u > static_cast<double>(g.size() - 1)) return 0.0;
  auto i = static_cast<std::size_t>(u);
  if (i >= g.size() - 1) i = g.size() - 2;
  double s = u - static_cast<double>(i);
  return g.values[i] + s * (g.values[i + 1] - g.values[i]);
}

// dst += src on a shared lattice; falls back to linear resampling when the
// origins are not lattice-aligned
void add_density(DensityGrid& dst, const DensityGrid& src) {
  if (src.empty()) return;
  if (dst.empty()) {
    dst = src;
    return;
  }
  if (!steps_match(dst.step, src.step))
    fail(Errc::config, "density steps differ in measure addition");
  double step = dst.step;
  double off = (src.origin - dst.origin) / step;
  double r = std::round(off);
  if (std::abs(off - r) <= 1e-6) {
    auto shift = static_cast<std::int64_t>(r);
    std::int64_t lo = std::min<std::int64_t>(0, shift);
    std::int64_t hi = std::max<std::int64_t>(static_cast<std::int64_t>(dst.size()) - 1,
                                             shift + static_cast<std::int64_t>(src.size()) - 1);
    auto n = static_cast<std::size_t>(hi - lo + 1);
    if (n > kMaxAccumGrid) fail(Errc::config, "density grid too large");
    std::vector<double> vals(n, 0.0);
    for (std::size_t i = 0; i < dst.size(); ++i) vals[static_cast<std::size_t>(-lo) + i] = dst.values[i];
    for (std::size_t i = 0; i < src.size(); ++i)
      vals[static_cast<std::size_t>(shift - lo) + i] += src.values[i];
    dst.origin = dst.origin + static_cast<double>(lo) * step;
    dst.values = std::move(vals);
    dst.end = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  // unaligned: resample src onto dst's lattice (second-order accurate)
  double lo_x = std::min(dst.origin, src.origin);
  double hi_x = std::max(grid_end(dst), grid_end(src));
  auto lo = static_cast<std::int64_t>(std::floor((lo_x - dst.origin) / step));
  auto hi = static_cast<std::int64_t>(std::ceil((hi_x - dst.origin) / step));
  if (hi - lo + 1 > static_cast<std::int64_t>(kMaxAccumGrid))
    fail(Errc::config, "density grid too large");
  auto n = static_cast<std::size_t>(hi - lo + 1);
  std::vector<double> vals(n, 0.0);
  for (std::int64_t k = lo; k <= hi; ++k) {
    double x = dst.origin + static_cast<double>(k) * step;
    double v = grid_interp(src, x);
    if (k >= 0 && k < static_cast<std::int64_t>(dst.size())) v += dst.values[static_cast<std::size_t>(k)];
    vals[static_cast<std::size_t>(k - lo)] = v;
  }
  dst.origin = dst.origin + static_cast<double>(lo) * step;
  dst.values = std::move(vals);
  dst.end = std::numeric_limits<double>::quiet_NaN();
}

// shift-and-add of a density by every atom of the lattice part
void atoms_times_density(const std::map<std::int64_t, double>& atoms, double pitch,
                         const DensityGrid& g, DensityGrid& out) {
  if (atoms.empty() || g.empty()) return;
  double q = pitch / g.step;
  double rq = std::round(q);
  if (std::abs(q - rq) > 1e-9 * std::max(1.0, std::abs(q)))
    fail(Errc::config, "atom pitch is not a lattice multiple of the density step");
  auto stride = static_cast<std::int64_t>(rq);
  std::int64_t j_min = atoms.begin()->first;
  std::int64_t j_max = atoms.rbegin()->first;
  std::int64_t span = (j_max - j_min) * stride + static_cast<std::int64_t>(g.size());
  if (span <= 0 || span > static_cast<std::int64_t>(kMaxAccumGrid))
    fail(Errc::config, "density grid too large");
  DensityGrid acc;
  acc.step = g.step;
  acc.origin = g.origin + static_cast<double>(j_min) * pitch;
  acc.values.assign(static_cast<std::size_t>(span), 0.0);
  for (const auto& [j, w] : atoms) {
    auto base = static_cast<std::size_t>((j - j_min) * stride);
    for (std::size_t i = 0; i < g.size(); ++i) acc.values[base + i] += w * g.values[i];
  }
  add_density(out, acc);
}

void densities_convolve(const DensityGrid& f, const DensityGrid& g, DensityGrid& out) {
  if (f.empty() || g.empty()) return;
  if (!steps_match(f.step, g.step))
    fail(Errc::config, "density steps differ in convolution");
  std::size_t n = f.size() + g.size() - 1;
  if (n > kMaxConvGrid) fail(Errc::config, "density grid too large for direct convolution");
  DensityGrid prod;
  prod.step = f.step;
  prod.origin = f.origin + g.origin;
  prod.values.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t i0 = k >= g.size() - 1 ? k - (g.size() - 1) : 0;
    std::size_t i1 = std::min(f.size() - 1, k);
    double s = 0.0;
    for (std::size_t i = i0; i <= i1; ++i) s += f.values[i] * g.values[k - i];
    prod.values[k] = f.step * s;
  }
  add_density(out, prod);
}

void add_measure(SignedMeasure& dst, const SignedMeasure& src) {
  for (const auto& [j, w] : src.atoms) dst.atoms[j] += w;
  add_density(dst.density, src.density);
}

void scale_measure(SignedMeasure& m, double c) {
  for (auto& [j, w] : m.atoms) w *= c;
  scale_grid(m.density, c);
}

} // namespace

std::pair<double, double> SignedMeasure::density_support() const {
  if (density.empty()) return {0.0, 0.0};
  return {density.origin, grid_end(density)};
}

double mass(const SignedMeasure& m) {
  double s = 0.0;
  for (const auto& [j, w] : m.atoms) s += w;
  return s + trapezoid_mass(m.density);
}

double total_variation(const SignedMeasure& m) {
  double s = 0.0;
  for (const auto& [j, w] : m.atoms) s += std::abs(w);
  // trapezoid reading of |density|, consistent with mass()
  const auto& g = m.density;
  if (g.size() < 2) return s;
  double d = 0.0;
  for (double v : g.values) d += std::abs(v);
  d -= 0.5 * (std::abs(g.values.front()) + std::abs(g.values.back()));
  return s + g.step * d;
}

SignedMeasure scaled(SignedMeasure m, double c) {
  scale_measure(m, c);
  return m;
}

SignedMeasure reflect(const SignedMeasure& m) {
  SignedMeasure r;
  r.atom_spacing = m.atom_spacing;
  for (const auto& [j, w] : m.atoms) r.atoms[-j] = w;
  if (!m.density.empty()) {
    r.density.step = m.density.step;
    r.density.values.assign(m.density.values.rbegin(), m.density.values.rend());
    // negation is exact, so applying reflect twice restores origin bitwise
    r.density.origin = -grid_end(m.density);
    r.density.end = -m.density.origin;
  }
  return r;
}

SignedMeasure convolve(const SignedMeasure& m1, const SignedMeasure& m2) {
  bool a1 = !m1.atoms.empty();
  bool a2 = !m2.atoms.empty();
  if (a1 && a2 && !steps_match(m1.atom_spacing, m2.atom_spacing))
    fail(Errc::config, "atom lattices differ in convolution");
  SignedMeasure r;
  r.atom_spacing = a1 ? m1.atom_spacing : (a2 ? m2.atom_spacing : m1.atom_spacing);
  for (const auto& [ja, wa] : m1.atoms)
    for (const auto& [jb, wb] : m2.atoms) r.atoms[ja + jb] += wa * wb;
  atoms_times_density(m1.atoms, m1.atom_spacing, m2.density, r.density);
  atoms_times_density(m2.atoms, m2.atom_spacing, m1.density, r.density);
  densities_convolve(m1.density, m2.density, r.density);
  prune_atoms(r, 1e-15 * total_variation(r));
  return r;
}

SignedMeasure conv_exp(const SignedMeasure& m, double scale, double tol) {
  if (!(tol > 0.0)) fail(Errc::config, "conv_exp tolerance must be positive");
  double x = total_variation(m) * std::abs(scale);
  if (!std::isfinite(x)) fail(Errc::config, "conv_exp argument has infinite total variation");
  SignedMeasure result;
  result.atom_spacing = m.atom_spacing;
  result.density.step = m.density.step;
  result.atoms[0] = 1.0;
  SignedMeasure term = result;
  double guard = std::exp(x);
  double bound = 1.0; // a priori total-variation bound of the current term
  for (int k = 1; bound * (x / k) * guard >= tol; ++k) {
    if (k > 400) fail(Errc::config, "conv_exp series did not terminate");
    term = convolve(term, m);
    scale_measure(term, scale / k);
    add_measure(result, term);
    bound *= x / k;
  }
  prune_atoms(result, 1e-15 * total_variation(result));
  return result;
}

double measure_cdf(const SignedMeasure& m, double t) {
  double slack = lattice_slack(m.atom_spacing);
  double s = 0.0;
  for (const auto& [j, w] : m.atoms) {
    if (m.position(j) > t + slack) break;
    s += w;
  }
  return s + trapezoid_cdf(m.density, t);
}

double measure_upper_tail(const SignedMeasure& m, double y) {
  double slack = lattice_slack(m.atom_spacing);
  double s = 0.0;
  for (auto it = m.atoms.rbegin(); it != m.atoms.rend(); ++it) {
    if (m.position(it->first) < y - slack) break;
    s += it->second;
  }
  return s + trapezoid_mass(m.density) - trapezoid_cdf(m.density, y);
}

double atom_mass_near(const SignedMeasure& m, double x) {
  double j = std::round(x / m.atom_spacing);
  if (std::abs(x - j * m.atom_spacing) > lattice_slack(m.atom_spacing)) return 0.0;
  return m.atom_at(static_cast<std::int64_t>(j));
}

CumulativeTable cumulative(const SignedMeasure& m, const std::vector<double>& ts) {
  CumulativeTable tab;
  tab.ts = ts;
  tab.values.reserve(ts.size());
  for (double t : ts) tab.values.push_back(measure_cdf(m, t));
  tab.atom_list.reserve(m.atoms.size());
  for (const auto& [j, w] : m.atoms) tab.atom_list.emplace_back(m.position(j), w);
  return tab;
}

void prune_atoms(SignedMeasure& m, double threshold) {
  for (auto it = m.atoms.begin(); it != m.atoms.end();) {
    if (std::abs(it->second) < threshold)
      it = m.atoms.erase(it);
    else
      ++it;
  }
}

} // namespace cpd
