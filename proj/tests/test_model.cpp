#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "cpd/errors.hpp"
#include "cpd/model.hpp"

using namespace cpd;

namespace {

LevyTriple two_atoms(double q_plus, double q_minus) {
  LevyTriple t;
  t.lambda_ = q_plus + q_minus;
  t.discrete_weights[1] = q_plus;
  t.discrete_weights[-1] = q_minus;
  return t;
}

LevyTriple atom_plus_uniform() {
  // one atom at +1 carrying half the intensity, uniform density on [0,1]
  // carrying the other half
  LevyTriple t;
  t.lambda_ = 1.0;
  t.discrete_weights[1] = 0.5;
  t.ac_density.origin = 0.0;
  t.ac_density.step = 1.0 / 64.0;
  t.ac_density.values.assign(65, 0.5);
  return t;
}

} // namespace

TEST_CASE("triple validation rejects broken inputs") {
  LevyTriple bad = two_atoms(0.6, 0.4);
  bad.lambda_ = 0.0;
  CHECK_THROWS_AS(validate_triple(bad), Error);

  bad = two_atoms(0.6, 0.4);
  bad.discrete_weights[0] = 0.1;
  CHECK_THROWS_AS(validate_triple(bad), Error);

  bad = two_atoms(0.6, 0.4);
  bad.discrete_weights[1] = -0.6;
  CHECK_THROWS_AS(validate_triple(bad), Error);

  bad = two_atoms(0.6, 0.4);
  bad.lambda_ = 2.0; // atoms only carry mass 1
  CHECK_THROWS_AS(validate_triple(bad), Error);

  LevyTriple neg = atom_plus_uniform();
  neg.ac_density.values[3] = -0.1;
  CHECK_THROWS_AS(validate_triple(neg), Error);

  CHECK_NOTHROW(validate_triple(two_atoms(0.6, 0.4)));
  CHECK_NOTHROW(validate_triple(atom_plus_uniform()));
}

TEST_CASE("characteristic function bounds and normalization") {
  LevyTriple t = two_atoms(0.6, 0.4);
  t.gamma = 0.3;
  const double delta = 1.0;
  CHECK(std::abs(char_fn(t, delta, 0.0) - std::complex<double>{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(nu_fourier(t, 0.0) - std::complex<double>{t.lambda_, 0.0}) < 1e-14);
  double lo = std::exp(-2.0 * t.lambda_ * delta);
  for (int i = -200; i <= 200; ++i) {
    double u = 0.37 * i;
    double m = std::abs(char_fn(t, delta, u));
    CHECK(m <= 1.0 + 1e-12);
    CHECK(m >= lo - 1e-12);
  }
}

TEST_CASE("simulated increments live on the shifted lattice") {
  LevyTriple t = two_atoms(0.5, 0.5);
  t.gamma = 0.25;
  IncrementSample s = simulate(t, 1.0, 20000, 42);
  REQUIRE(s.values.size() == 20000);
  std::size_t at_drift = 0;
  for (double z : s.values) {
    double lattice = z - 0.25;
    CHECK(lattice == std::nearbyint(lattice)); // exact lattice arithmetic
    if (z == 0.25) ++at_drift;
  }
  // no-jump increments hit gamma*delta bitwise; their frequency matches
  // exp(-lambda*delta) (plus the even cancellation terms) loosely
  double frac = static_cast<double>(at_drift) / 20000.0;
  CHECK(frac > 0.40);
  CHECK(frac < 0.53);
}

TEST_CASE("simulation moments match the model") {
  LevyTriple t = two_atoms(1.0, 0.0); // unit-rate Poisson on +1
  IncrementSample s = simulate(t, 1.0, 50000, 3);
  double mean = 0.0;
  std::size_t zeros = 0;
  for (double z : s.values) {
    mean += z;
    if (z == 0.0) ++zeros;
  }
  mean /= 50000.0;
  // E[Z] = lambda*delta, Var[Z] = lambda*delta, so 4 sigma ~ 0.018
  CHECK(std::abs(mean - 1.0) < 0.02);
  double zero_frac = static_cast<double>(zeros) / 50000.0;
  double p0 = std::exp(-1.0);
  CHECK(std::abs(zero_frac - p0) < 4.0 * std::sqrt(p0 * (1 - p0) / 50000.0));
}

TEST_CASE("simulation is deterministic in the seed") {
  LevyTriple t = two_atoms(0.6, 0.4);
  IncrementSample a = simulate(t, 1.0, 500, 9);
  IncrementSample b = simulate(t, 1.0, 500, 9);
  IncrementSample c = simulate(t, 1.0, 500, 10);
  REQUIRE(a.values.size() == b.values.size());
  bool identical = true;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    identical = identical && (a.values[i] == b.values[i]);
  CHECK(identical);
  bool differs = false;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    differs = differs || (a.values[i] != c.values[i]);
  CHECK(differs);
}

TEST_CASE("excessive jump intensity per increment is rejected") {
  LevyTriple t = two_atoms(40.0, 0.0);
  CHECK_THROWS_AS(simulate(t, 1.0, 10, 1), Error);
  try {
    simulate(t, 1.0, 10, 1);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
    CHECK(e.exit_code() == 2);
  }
}

TEST_CASE("absolutely continuous jumps follow the density") {
  LevyTriple t = atom_plus_uniform();
  // small lambda*delta so nonzero increments are mostly single jumps
  IncrementSample s = simulate(t, 0.05, 60000, 17);
  std::vector<double> ac_like;
  std::size_t at_atom = 0, nonzero = 0;
  for (double z : s.values) {
    if (z == 0.0) continue;
    ++nonzero;
    if (z == 1.0)
      ++at_atom;
    else if (z > 0.0 && z < 1.0)
      ac_like.push_back(z);
  }
  REQUIRE(nonzero > 2000);
  double atom_share = static_cast<double>(at_atom) / static_cast<double>(nonzero);
  CHECK(std::abs(atom_share - 0.5) < 0.04);
  // KS distance of the single-jump values against U[0,1]; a few percent of
  // the sample are multi-jump contaminants, so the gate is loose
  std::sort(ac_like.begin(), ac_like.end());
  double d = 0.0;
  for (std::size_t i = 0; i < ac_like.size(); ++i) {
    double fe_hi = static_cast<double>(i + 1) / static_cast<double>(ac_like.size());
    double fe_lo = static_cast<double>(i) / static_cast<double>(ac_like.size());
    d = std::max(d, std::abs(fe_hi - ac_like[i]));
    d = std::max(d, std::abs(fe_lo - ac_like[i]));
  }
  CHECK(d < 0.04);
}

TEST_CASE("true_N and true_F evaluate the jump CDF") {
  LevyTriple t = two_atoms(0.6, 0.4);
  double inf = std::numeric_limits<double>::infinity();
  CHECK(true_N(t, -1.0 - 1e-6) == 0.0);
  CHECK(true_N(t, -1.0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(true_N(t, 0.0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(true_N(t, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(true_N(t, inf) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(true_F(t, -inf) == 0.0);
  CHECK(true_F(t, 0.5) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(true_F(t, inf) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("assumption report on the fixtures") {
  AssumptionReport r = validate_assumptions(two_atoms(0.6, 0.4), 8.0, 2.0);
  CHECK(r.pass());
  CHECK(r.alpha_moment == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.log_moment_finite);

  AssumptionReport r2 = validate_assumptions(atom_plus_uniform(), 8.0, 2.0);
  CHECK(r2.pass());
  CHECK(r2.alpha_moment < 1.0); // AC part concentrates below 1
}
