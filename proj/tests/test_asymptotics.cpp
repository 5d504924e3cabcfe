#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cpd/asymptotics.hpp"
#include "cpd/errors.hpp"
#include "cpd/measure.hpp"
#include "cpd/model.hpp"

using namespace cpd;

namespace {

LevyTriple two_atoms(double q_plus, double q_minus, double lambda = 0.0) {
  LevyTriple t;
  t.lambda_ = lambda > 0.0 ? lambda : q_plus + q_minus;
  t.discrete_weights[1] = q_plus;
  t.discrete_weights[-1] = q_minus;
  return t;
}

LevyTriple poisson(double lambda) {
  LevyTriple t;
  t.lambda_ = lambda;
  t.discrete_weights[1] = lambda;
  return t;
}

} // namespace

TEST_CASE("limit laws of the unit Poisson increment") {
  LimitLawPair laws = limit_laws(poisson(1.0), 1.0, 1e-12);
  CHECK(laws.drift_shift == 0.0);
  double fact = 1.0;
  for (int k = 0; k <= 10; ++k) {
    if (k > 0) fact *= k;
    // P({k}) = e^-1 / k!, Phi({-k}) = e (-1)^k / k!
    CHECK(std::abs(laws.P.atom_at(k) - std::exp(-1.0) / fact) < 1e-13);
    double phik = std::exp(1.0) * (k % 2 == 0 ? 1.0 : -1.0) / fact;
    CHECK(std::abs(laws.Phi.atom_at(-k) - phik) < 1e-12);
  }
  CHECK(std::abs(mass(laws.P) - 1.0) < 1e-11);
  CHECK(std::abs(mass(laws.Phi) - 1.0) < 1e-11);
}

TEST_CASE("the two limit laws invert each other under reflection") {
  for (auto triple : {poisson(1.0), two_atoms(0.6, 0.4)}) {
    const double tol = 1e-10;
    LimitLawPair laws = limit_laws(triple, 1.0, tol);
    SignedMeasure conv = convolve(reflect(laws.Phi), laws.P);
    conv.atoms[0] -= 1.0;
    CHECK(total_variation(conv) < 10.0 * tol * std::exp(2.0));
  }
}

TEST_CASE("lattice product identity") {
  for (auto triple : {poisson(1.0), two_atoms(0.6, 0.4), two_atoms(0.5, 0.5)}) {
    LimitLawPair laws = limit_laws(triple, 1.0, 1e-12);
    double s = 0.0;
    for (const auto& [j, p] : laws.P.atoms) s += p * laws.Phi.atom_at(j);
    CHECK(std::abs(s - 1.0) < 1e-10);
  }
}

TEST_CASE("intensity variance has a closed form on positive support") {
  for (double mu : {0.1, 0.5, 1.0, 2.0}) {
    const double delta = 1.0;
    LevyTriple t = poisson(mu);
    LimitLawPair laws = limit_laws(t, delta, 1e-12);
    WeightSpec w = weight_intensity();
    double got = covariance_functional(w, w, laws, delta);
    double expect = (std::exp(mu * delta) - 1.0) / (delta * delta);
    CHECK(std::abs(got - expect) < 1e-8 * expect);
  }
  // and with delta != 1
  const double delta = 0.5, mu = 1.3; // lambda*delta = 0.65
  LevyTriple t = poisson(1.3);
  LimitLawPair laws = limit_laws(t, delta, 1e-12);
  WeightSpec w = weight_intensity();
  double got = covariance_functional(w, w, laws, delta);
  double expect = (std::exp(mu * delta) - 1.0) / (delta * delta);
  CHECK(std::abs(got - expect) < 1e-8 * expect);
}

TEST_CASE("origin and lattice terms add up to the intensity variance") {
  LevyTriple t = two_atoms(0.5, 0.5);
  LimitLawPair laws = limit_laws(t, 1.0, 1e-12);
  SigmaLambdaSplit split = sigma_lambda_decomposition(laws, 1.0);
  WeightSpec w = weight_intensity();
  double whole = covariance_functional(w, w, laws, 1.0);
  CHECK(std::abs(split.total() - whole) < 1e-8 * std::abs(whole));
  CHECK(split.lattice_term > 0.0);

  laws.drift_shift = 0.25;
  CHECK_THROWS_AS(sigma_lambda_decomposition(laws, 1.0), Error);
  try {
    sigma_lambda_decomposition(laws, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::nonzero_drift);
  }
}

TEST_CASE("frozen covariance values for the asymmetric two-atom model") {
  LevyTriple t = two_atoms(0.6, 0.4);
  CovarianceReport rep =
      covariance_report(t, 1.0, {-1.0, 0.0, 1.0,
                                 std::numeric_limits<double>::infinity()}, 1e-12);
  CHECK(rep.exact.sigma2_lambda == doctest::Approx(5.312008909122).epsilon(1e-9));
  CHECK(rep.exact.sigma2_qj.at(1) == doctest::Approx(4.597269524164).epsilon(1e-9));
  CHECK(rep.exact.sigma2_pj.at(1) == doctest::Approx(1.580121177912).epsilon(1e-9));
  CHECK(rep.exact.SigmaN(0, 0) == doctest::Approx(1.4519756712).epsilon(1e-8));
  CHECK(rep.exact.SigmaN(1, 1) == doctest::Approx(1.4519756712).epsilon(1e-8));
  CHECK(rep.exact.SigmaN(2, 2) == doctest::Approx(8.5422912005).epsilon(1e-8));
  CHECK(rep.exact.SigmaF(0, 0) == doctest::Approx(0.3970353088).epsilon(1e-8));
  CHECK(rep.exact.SigmaF(1, 1) == doctest::Approx(0.3970353088).epsilon(1e-8));
  CHECK(rep.exact.SigmaF(2, 2) == doctest::Approx(0.8763597174).epsilon(1e-8));
  // structural endpoints: counting variance at +inf equals the intensity
  // variance, distribution variance vanishes there
  CHECK(rep.exact.SigmaN(3, 3) ==
        doctest::Approx(rep.exact.sigma2_lambda).epsilon(1e-10));
  CHECK(std::abs(rep.exact.SigmaF(3, 3)) < 1e-12);
}

TEST_CASE("covariance matrices are positive semidefinite") {
  LevyTriple t = two_atoms(0.6, 0.4);
  LimitLawPair laws = limit_laws(t, 1.0, 1e-12);
  std::vector<WeightSpec> weights = {weight_intensity(),     weight_atom(t, 1),
                                     weight_atom(t, -1),     weight_level(-1.0),
                                     weight_level(0.0),      weight_level(1.0),
                                     weight_atom_rel(t, 1),  weight_level_rel(t, 0.0)};
  weights[0].pitch = t.atom_spacing;
  for (auto i : {3, 4, 5}) weights[static_cast<std::size_t>(i)].pitch = t.atom_spacing;
  Eigen::MatrixXd m = covariance_matrix(weights, laws, 1.0);
  REQUIRE(m.rows() == static_cast<Eigen::Index>(weights.size()));
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  CHECK(eig.eigenvalues().minCoeff() > -1e-8 * m.trace());
  for (const auto& w : weights) {
    double v = covariance_functional(w, w, laws, 1.0);
    CHECK(v > -1e-10);
  }
}

TEST_CASE("small intensity expansion approaches the exact functional") {
  LevyTriple t = two_atoms(0.6, 0.4);
  WeightSpec w0 = weight_level_rel(t, 0.0);
  auto rel_gap = [&](double delta) {
    LimitLawPair laws = limit_laws(t, delta, 1e-12);
    double exact = covariance_functional(w0, w0, laws, delta);
    double fo = small_lambda_delta(w0, w0, t, delta);
    return std::abs(exact - fo) / std::abs(exact);
  };
  double r_small = rel_gap(0.01);
  double r_big = rel_gap(0.1);
  CHECK(r_small == doctest::Approx(0.002810).epsilon(0.05));
  CHECK(r_big == doctest::Approx(0.029038).epsilon(0.05));
  CHECK(r_big / r_small > 5.0);
  CHECK(r_big / r_small < 20.0);
}

TEST_CASE("distribution covariance matches the Brownian bridge at small intensity") {
  LevyTriple t = two_atoms(0.6, 0.4);
  const double delta = 0.05; // lambda*delta = 0.05
  std::vector<double> ts = {-1.0, 0.0};
  CovarianceReport rep = covariance_report(t, delta, ts, 1e-12);
  Eigen::MatrixXd scaled_cov = t.lambda_ * delta * rep.exact.SigmaF;
  Eigen::MatrixXd bridge(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double fi = true_F(t, ts[static_cast<std::size_t>(i)]);
      double fj = true_F(t, ts[static_cast<std::size_t>(j)]);
      bridge(i, j) = true_F(t, std::min(ts[static_cast<std::size_t>(i)],
                                        ts[static_cast<std::size_t>(j)])) -
                     fi * fj;
    }
  double rel = (scaled_cov - bridge).norm() / bridge.norm();
  CHECK(rel < 0.05);
}

TEST_CASE("weight values expand the catalog pointwise") {
  LevyTriple t = two_atoms(0.6, 0.4);
  WeightSpec wi = weight_intensity();
  CHECK(weight_value(wi, 0.0) == 0.0);
  CHECK(weight_value(wi, 1.0) == 1.0);
  CHECK(weight_value(wi, 0.5) == 1.0); // off-lattice still counts

  WeightSpec wa = weight_atom(t, 1);
  CHECK(weight_value(wa, 1.0) == 1.0);
  CHECK(weight_value(wa, -1.0) == 0.0);
  CHECK(weight_value(wa, 1.0 + 1e-12) == 1.0); // lattice slack

  WeightSpec ww = weight_atom_window(t);
  CHECK(weight_value(ww, 0.0) == 0.0);
  CHECK(weight_value(ww, 2.0) == 1.0);
  CHECK(weight_value(ww, 0.5) == 0.0); // off-lattice excluded

  WeightSpec wl = weight_level(1.0);
  CHECK(weight_value(wl, 0.5) == 1.0);
  CHECK(weight_value(wl, 2.0) == 0.0);
  CHECK(weight_value(wl, 0.0) == 0.0); // origin removed when t >= 0
  WeightSpec wneg = weight_level(-1.0);
  CHECK(weight_value(wneg, -2.0) == 1.0);
  CHECK(weight_value(wneg, 0.0) == 0.0);
}

TEST_CASE("broken weights are rejected") {
  LimitLawPair laws = limit_laws(poisson(1.0), 1.0, 1e-10);
  WeightSpec empty;
  empty.name = "empty";
  CHECK_THROWS_AS(covariance_functional(empty, empty, laws, 1.0), Error);
  WeightSpec bad = weight_intensity();
  bad.pitch = -1.0;
  try {
    covariance_functional(bad, bad, laws, 1.0);
    FAIL("expected UnsupportedWeight");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unsupported_weight);
    CHECK(e.exit_code() == 2);
  }
}

TEST_CASE("default level grid brackets five pitches plus sentinels") {
  std::vector<double> ts = default_level_grid(2.0);
  REQUIRE(ts.size() == 43);
  CHECK(std::isinf(ts.front()));
  CHECK(ts.front() < 0.0);
  CHECK(std::isinf(ts.back()));
  CHECK(ts[1] == doctest::Approx(-10.0));
  CHECK(ts[41] == doctest::Approx(10.0));
  CHECK(ts[2] - ts[1] == doctest::Approx(0.5));
}

TEST_CASE("first order column of the report tracks the exact one") {
  LevyTriple t = two_atoms(0.6, 0.4);
  CovarianceReport rep = covariance_report(t, 0.01, {0.0}, 1e-12);
  CHECK(rep.first_order.sigma2_lambda ==
        doctest::Approx(rep.exact.sigma2_lambda).epsilon(0.02));
  CHECK(rep.first_order.sigma2_qj.at(1) ==
        doctest::Approx(rep.exact.sigma2_qj.at(1)).epsilon(0.02));
}
