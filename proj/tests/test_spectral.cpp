#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "cpd/errors.hpp"
#include "cpd/kernel.hpp"
#include "cpd/model.hpp"
#include "cpd/spectral.hpp"

using namespace cpd;
using std::numbers::pi;

namespace {

LevyTriple two_atoms(double q_plus, double q_minus) {
  LevyTriple t;
  t.lambda_ = q_plus + q_minus;
  t.discrete_weights[1] = q_plus;
  t.discrete_weights[-1] = q_minus;
  return t;
}

// analytic log characteristic exponent on the grid, conjugate-symmetric by
// construction
ComplexVec analytic_log(const LevyTriple& t, double delta, const FrequencyGrid& g) {
  ComplexVec out(g.count);
  out[g.center] = {0.0, 0.0};
  for (std::size_t k = 1; k <= g.center; ++k) {
    double u = g.du * static_cast<double>(k);
    std::complex<double> l =
        delta * (std::complex<double>{0.0, t.gamma * u} + nu_fourier(t, u) - t.lambda_);
    out[g.center + k] = l;
    out[g.center - k] = std::conj(l);
  }
  return out;
}

} // namespace

TEST_CASE("frequency grid is exactly symmetric and fine enough") {
  FrequencyGrid g = make_grid(0.02, 10.0, 16.0);
  CHECK(g.count % 2 == 1);
  CHECK(g.u(g.center) == 0.0);
  for (std::size_t k = 1; k <= g.center; ++k)
    CHECK(g.u(g.center + k) == -g.u(g.center - k)); // bitwise negation
  CHECK(g.du * 10.0 <= pi / 8.0 * (1.0 + 1e-12));
  CHECK(g.umax() == doctest::Approx(50.0).epsilon(1e-12));

  CHECK_THROWS_AS(make_grid(0.0, 10.0, 16.0), Error);
  CHECK_THROWS_AS(make_grid(0.02, 10.0, 8.0), Error);
  CHECK_THROWS_AS(make_grid(1e-9, 10.0, 16.0), Error); // grid would explode
}

TEST_CASE("ecf matches a direct evaluation and is exactly symmetric") {
  IncrementSample s;
  s.delta = 1.0;
  s.values = {0.3, -1.2, 0.7, 0.3, 2.0};
  FrequencyGrid g = make_grid(0.1, 2.0, 16.0);
  ComplexVec phi = ecf(s, g);
  REQUIRE(phi.size() == g.count);
  CHECK(phi[g.center] == std::complex<double>{1.0, 0.0}); // exact at u=0
  for (std::size_t k = 1; k <= g.center; ++k)
    CHECK(phi[g.center - k] == std::conj(phi[g.center + k]));
  for (std::size_t i = 0; i < g.count; i += 37) {
    std::complex<double> direct{0.0, 0.0};
    for (double z : s.values)
      direct += std::exp(std::complex<double>{0.0, g.u(i) * z});
    direct /= static_cast<double>(s.values.size());
    CHECK(std::abs(phi[i] - direct) < 1e-13);
  }
  IncrementSample empty;
  CHECK_THROWS_AS(ecf(empty, g), Error);
}

TEST_CASE("distinguished log unwinds more than ten pi of phase") {
  LevyTriple t = two_atoms(1.0, 0.0);
  t.gamma = 1.0;
  FrequencyGrid g = make_grid(0.02, 10.0, 16.0); // umax = 50
  ComplexVec phi(g.count);
  for (std::size_t i = 0; i < g.count; ++i) phi[i] = char_fn(t, 1.0, g.u(i));
  phi[g.center] = {1.0, 0.0};
  ComplexVec lg = distinguished_log(phi, g, 1e-6);
  ComplexVec expect = analytic_log(t, 1.0, g);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < g.count; ++i)
    max_diff = std::max(max_diff, std::abs(lg[i] - expect[i]));
  CHECK(max_diff < 1e-9);
  CHECK(lg.front().imag() < -10.0 * pi); // winding accumulated, not clipped
  CHECK(lg.back().imag() > 10.0 * pi);
  double round_trip = 0.0;
  for (std::size_t i = 0; i < g.count; ++i)
    round_trip = std::max(round_trip, std::abs(std::exp(lg[i]) - phi[i]));
  CHECK(round_trip < 1e-12);
}

TEST_CASE("distinguished log refusal modes") {
  FrequencyGrid g = make_grid(0.1, 1.0, 16.0);
  ComplexVec vals(g.count, {1.0, 0.0});

  ComplexVec low = vals;
  low[g.center + 3] = {0.05, 0.0};
  try {
    distinguished_log(low, g, 0.5);
    FAIL("expected BranchAmbiguity");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::branch_ambiguity);
    CHECK(e.is_refusal());
    CHECK(e.exit_code() == 3);
  }

  ComplexVec jumpy = vals;
  jumpy[g.center + 4] = {0.0, 1.0}; // ratio i, |i - 1| > 1/2
  try {
    distinguished_log(jumpy, g, 0.5);
    FAIL("expected PhaseJump");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::phase_jump);
    CHECK(e.is_refusal());
  }

  ComplexVec off = vals;
  off[g.center] = {0.9, 0.0};
  try {
    distinguished_log(off, g, 0.5);
    FAIL("expected config failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
  }
}

TEST_CASE("indicator transform agrees with the closed form") {
  auto cases = std::vector<std::array<double, 3>>{
      {{-1.0, 2.0, 0.7}}, {{0.5, 3.5, -2.3}}, {{-4.0, -1.0, 5.0}}, {{-1.5, 1.5, 0.01}}};
  for (auto [a, b, u] : cases) {
    FtWeight w = ft_indicator(a, b);
    std::complex<double> iu{0.0, u};
    std::complex<double> expect = (std::exp(iu * b) - std::exp(iu * a)) / iu;
    CHECK(std::abs(w(u) - expect) < 1e-12 * std::max(1.0, std::abs(expect)));
  }
  FtWeight w = ft_indicator(-1.0, 2.0);
  CHECK(w(0.0) == std::complex<double>{3.0, 0.0});
}

TEST_CASE("drift weight transform is odd and continuous at the series switch") {
  KernelSpec kernel = make_kernel(0.5);
  FtWeight w = ft_weight_gamma(1.0, kernel.c);
  // closed form 2i (sin x - x cos x)/(c u^2), x = h u
  double u = 3.0;
  std::complex<double> expect{0.0,
                              2.0 * (std::sin(u) - u * std::cos(u)) / (kernel.c * u * u)};
  CHECK(std::abs(w(u) - expect) < 1e-12 * std::abs(expect));
  CHECK(std::abs(w(-u) + w(u)) < 1e-15); // odd
  // both sides of the series switch agree with the reference formula
  for (double us : {0.0999999, 0.1000001}) {
    double ref = 2.0 * (std::sin(us) - us * std::cos(us)) / (kernel.c * us * us);
    CHECK(std::abs(w(us).imag() - ref) < 1e-11 * std::abs(ref));
  }
  CHECK(std::abs(w(0.0)) == 0.0);
}

TEST_CASE("level truncation follows the three-case rule") {
  double eps = 0.01;
  CHECK(level_truncation(0.995, 1.0, eps) == doctest::Approx(0.99).epsilon(1e-14));
  CHECK(level_truncation(1.0, 1.0, eps) == doctest::Approx(1.01).epsilon(1e-14));
  CHECK(level_truncation(1.005, 1.0, eps) == doctest::Approx(1.01).epsilon(1e-14));
  CHECK(level_truncation(1.02, 1.0, eps) == 1.02);
  CHECK(level_truncation(0.985, 1.0, eps) == 0.985);
  CHECK(level_truncation(-0.995, 1.0, eps) == doctest::Approx(-0.99).epsilon(1e-14));
  double inf = std::numeric_limits<double>::infinity();
  CHECK(level_truncation(inf, 1.0, eps) == inf);
  CHECK(level_truncation(-inf, 1.0, eps) == -inf);
}

TEST_CASE("level weight collapses to the intensity weight beyond the cutoff") {
  double eps = 0.01, H = 5.5, pitch = 1.0;
  FtWeight wl = ft_weight_lambda(eps, H);
  FtWeight w_hi = ft_weight_level(7.0, pitch, eps, H);
  double inf = std::numeric_limits<double>::infinity();
  FtWeight w_inf = ft_weight_level(inf, pitch, eps, H);
  FtWeight w_lo = ft_weight_level(-7.0, pitch, eps, H);
  FtWeight w_ninf = ft_weight_level(-inf, pitch, eps, H);
  for (double u : {-3.7, -0.4, 0.0, 1.1, 8.9}) {
    std::complex<double> ref = wl(u);
    CHECK(w_hi(u) == ref); // bitwise identical construction
    CHECK(w_inf(u) == ref);
    CHECK(w_lo(u) == std::complex<double>{0.0, 0.0});
    CHECK(w_ninf(u) == std::complex<double>{0.0, 0.0});
  }
}

TEST_CASE("spectral integral is stable under grid refinement") {
  LevyTriple t = two_atoms(0.6, 0.4);
  // the inner cutoff must dominate the bandwidth or the origin spike smears
  // into the window, exactly as the schedules guarantee at run time
  const double delta = 1.0, h = 0.02, H = 5.5;
  KernelSpec kernel = make_kernel(0.5);
  FtWeight w = ft_weight_lambda(0.3, H);
  double coarse, fine;
  {
    FrequencyGrid g = make_grid(h, H, 16.0);
    coarse = spectral_integral(w, analytic_log(t, delta, g), g, kernel, h, delta);
  }
  {
    FrequencyGrid g = make_grid(h, H, 32.0);
    fine = spectral_integral(w, analytic_log(t, delta, g), g, kernel, h, delta);
  }
  CHECK(std::abs(coarse - fine) < 1e-6 * std::abs(fine));
  CHECK(std::abs(fine - t.lambda_) < 0.05); // sanity: near the true intensity
}

TEST_CASE("spectral integral rejects asymmetric input") {
  FrequencyGrid g = make_grid(0.1, 1.0, 16.0);
  KernelSpec kernel = make_kernel(0.5);
  ComplexVec bad(g.count, {0.0, 1.0}); // constant imaginary part: not symmetric
  FtWeight one = ft_indicator(-1.0, 1.0);
  try {
    spectral_integral(one, bad, g, kernel, 0.1, 1.0);
    FAIL("expected SymmetryViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::symmetry_violation);
    CHECK(e.is_refusal());
  }
}

TEST_CASE("kernel transform shape and normalization") {
  KernelSpec k = make_kernel(0.5);
  CHECK(k.ft(0.0) == 1.0); // unit integral of K via the transform at zero
  CHECK(k.ft(0.5) == 1.0);
  CHECK(k.ft(-0.3) == k.ft(0.3));
  CHECK(k.ft(1.0) == 0.0);
  CHECK(k.ft(2.0) == 0.0);
  double prev = 1.0;
  for (double u = 0.55; u < 1.0; u += 0.05) {
    double v = k.ft(u);
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
  CHECK_THROWS_AS(make_kernel(0.0), Error);
  CHECK_THROWS_AS(make_kernel(1.5), Error);
}

TEST_CASE("kernel anchors are frozen") {
  KernelSpec k = make_kernel(0.5);
  CHECK(k.c == doctest::Approx(0.0301119779790919133).epsilon(1e-9));
  CHECK(k.space(0.0) == doctest::Approx(0.2387324146378430).epsilon(1e-9));
  CHECK(k.space(1.0) == doctest::Approx(0.2160054095835360).epsilon(1e-9));
}

TEST_CASE("kernel decays at the cubic rate") {
  KernelSpec k = make_kernel(0.5);
  double bound = 0.0;
  for (double x = 0.0; x <= 200.0; x += 0.5)
    bound = std::max(bound, std::abs(k.space(x)) * std::pow(1.0 + x, 3.0));
  CHECK(bound < 100.0);
  CHECK(bound > 1.0); // the bound is attained away from zero, not vacuous
}
