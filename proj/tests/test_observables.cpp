#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pepo/ctm.hpp"
#include "pepo/models.hpp"
#include "pepo/observables.hpp"
#include "pepo/state.hpp"

using namespace pepo;

TEST_CASE("one-site expectation values") {
  DenseTensor rdm({2, 2});
  rdm(0, 0) = 3.0;
  rdm(1, 1) = 1.0;
  rdm(0, 1) = Complex(0.0, 0.5);
  rdm(1, 0) = Complex(0.0, -0.5);

  DenseTensor id = DenseTensor::identity(2);
  CHECK(expectOneSite(rdm, id).real() == doctest::Approx(1.0));
  CHECK(expectOneSite(rdm, ops::sigmaZ()).real() == doctest::Approx(0.5));
  // <sx> = (rdm(0,1) + rdm(1,0)) / tr = 0
  CHECK(std::abs(expectOneSite(rdm, ops::sigmaX())) < 1e-15);

  CHECK_THROWS_AS(expectOneSite(rdm, DenseTensor({3, 3})), DimensionError);
  DenseTensor traceless({2, 2});
  traceless(0, 0) = 1.0;
  traceless(1, 1) = -1.0;
  CHECK_THROWS_AS(expectOneSite(traceless, id), EnvironmentError);
}

TEST_CASE("spontaneous magnetization closed form") {
  const double beta_c = 0.5 * std::log(1.0 + std::sqrt(2.0));
  CHECK(onsagerMagnetization(0.1) == 0.0);
  CHECK(onsagerMagnetization(beta_c) == 0.0);
  CHECK(onsagerMagnetization(beta_c + 1e-6) > 0.0);
  CHECK(onsagerMagnetization(0.5) == doctest::Approx(0.911319377877).epsilon(1e-11));
  CHECK(onsagerMagnetization(50.0) == doctest::Approx(1.0));
  // monotone in beta above the critical point
  double prev = 0.0;
  for (double b = 0.45; b < 1.0; b += 0.05) {
    double m = onsagerMagnetization(b);
    CHECK(m >= prev);
    prev = m;
  }
  CHECK_THROWS_AS(onsagerMagnetization(0.0), ArgumentError);
  CHECK_THROWS_AS(onsagerMagnetization(-1.0), ArgumentError);
}

TEST_CASE("infinite temperature observables") {
  // at beta = 0 the state is the identity, so every observable is its
  // normalized trace; this exercises the full measure pipeline
  CtmOptions opt;
  opt.tol = 1e-10;

  {
    Model m = hardcoreBoseHubbard(1.0, 0.7);
    VectorizedPepo p = identityPepo(2);
    CtmEnvironment env = ctmConverge(p, 4, opt);
    CHECK(env.converged);
    ObservableRecord rec = measure(m, env, p, 1e-12);
    CHECK(rec.values.at("n") == doctest::Approx(0.5));
    CHECK(rec.values.at("sf_param") == doctest::Approx(0.0));
    CHECK(rec.values.at("var_n") == doctest::Approx(0.25));
    CHECK(rec.sublattice_spread < 1e-12);
    CHECK(rec.bond_dim == p.max_bond);
    CHECK(rec.chi == 4);
  }
  {
    Model m = softcoreBoseHubbard(1.0, 0.5, 10.0);
    VectorizedPepo p = identityPepo(3);
    CtmEnvironment env = ctmConverge(p, 4, opt);
    ObservableRecord rec = measure(m, env, p, 1e-12);
    CHECK(rec.values.at("n") == doctest::Approx(1.0));
    CHECK(rec.values.at("var_n") == doctest::Approx(2.0 / 3.0));
  }
  {
    Model m = isingModel(0.0);
    VectorizedPepo p = identityPepo(2);
    CtmEnvironment env = ctmConverge(p, 4, opt);
    ObservableRecord rec = measure(m, env, p, 1e-12);
    CHECK(rec.values.at("magnetization") == doctest::Approx(0.0));
    CHECK(rec.values.at("sx") == doctest::Approx(0.0));
  }
}

TEST_CASE("measured magnetization uses the absolute value") {
  // both ordered branches of the thermal network report the same positive
  // magnetization
  Model m = isingModel(0.0);
  CtmOptions opt;
  opt.tol = 1e-10;
  VectorizedPepo p = exactIsingPepo(0.6);
  CtmEnvironment env = ctmConverge(p, 12, opt);
  ObservableRecord rec = measure(m, env, p, 0.6);
  double mag = rec.values.at("magnetization");
  CHECK(mag == doctest::Approx(std::abs(rec.values.at("sz"))));
  CHECK(mag == doctest::Approx(onsagerMagnetization(0.6)).epsilon(1e-8));

  // flip the branch by conjugating every site with sx; sz changes sign but
  // the reported magnetization does not
  VectorizedPepo q = p;
  for (auto& site : q.sites)
    for (std::size_t u = 0; u < 2; ++u)
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t dn = 0; dn < 2; ++dn)
          for (std::size_t l = 0; l < 2; ++l) {
            std::swap(site(0, 0, u, r, dn, l), site(1, 1, u, r, dn, l));
            std::swap(site(0, 1, u, r, dn, l), site(1, 0, u, r, dn, l));
          }
  CtmEnvironment env2 = ctmConverge(q, 12, opt);
  ObservableRecord rec2 = measure(m, env2, q, 0.6);
  CHECK(rec2.values.at("sz") == doctest::Approx(-rec.values.at("sz")).epsilon(1e-8));
  CHECK(rec2.values.at("magnetization") == doctest::Approx(mag).epsilon(1e-8));
}

TEST_CASE("record carries the schedule point") {
  Model m = isingModel(0.0);
  VectorizedPepo p = exactIsingPepo(0.25);
  CtmEnvironment env = ctmConverge(p, 8);
  ObservableRecord rec = measure(m, env, p, 0.25);
  CHECK(rec.beta == doctest::Approx(0.25));
  CHECK(rec.temperature == doctest::Approx(4.0));
  CHECK(rec.ctm_iterations == env.iterations);
}
