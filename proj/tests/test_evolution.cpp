#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pepo/evolution.hpp"
#include "pepo/models.hpp"
#include "pepo/state.hpp"

using namespace pepo;

namespace {

MatrixXc randomUnitVector(std::size_t, std::mt19937&);

// lambda invariants required after every bond update: strictly positive,
// non-increasing, unit maximum
void checkLambdaGauge(const VectorizedPepo& p) {
  for (const auto& lam : p.lambdas) {
    REQUIRE(!lam.empty());
    CHECK(lam[0] == doctest::Approx(1.0));
    for (std::size_t i = 0; i < lam.size(); ++i) {
      CHECK(lam[i] > 0.0);
      if (i > 0) CHECK(lam[i] <= lam[i - 1] * (1.0 + 1e-12));
    }
  }
}

}  // namespace

TEST_CASE("bond exponential basics") {
  Model m = isingModel(0.0);
  DenseTensor bond = m.bondTerm();

  // tau = 0 gives the identity
  DenseTensor g0 = bondExponential(bond, 0.0);
  DenseTensor id4 = kron2(DenseTensor::identity(2), DenseTensor::identity(2));
  CHECK((g0 - id4).maxAbs() < 1e-14);

  // the Ising bond is diagonal, so the exponential is elementwise
  double tau = 0.3;
  DenseTensor g = bondExponential(bond, tau);
  CHECK(g(0, 0, 0, 0).real() == doctest::Approx(std::exp(tau)));
  CHECK(g(0, 1, 0, 1).real() == doctest::Approx(std::exp(-tau)));
  CHECK(g(1, 0, 1, 0).real() == doctest::Approx(std::exp(-tau)));
  CHECK(g(1, 1, 1, 1).real() == doctest::Approx(std::exp(tau)));

  // semigroup property: g(a) g(b) = g(a+b)
  DenseTensor ga = bondExponential(bond, 0.1);
  DenseTensor gb = bondExponential(bond, 0.25);
  DenseTensor gab = contract(ga, gb, {{2, 0}, {3, 1}});
  DenseTensor gsum = bondExponential(bond, 0.35);
  CHECK((gab - gsum).maxAbs() < 1e-13);
}

TEST_CASE("bond exponential rejects non-hermitian input") {
  DenseTensor bad({2, 2, 2, 2});
  bad(0, 0, 1, 1) = Complex(0.0, 1.0);
  CHECK_THROWS_AS(bondExponential(bad, 0.1), ModelError);
}

TEST_CASE("vectorized gate implements conjugation") {
  // applying the rank-8 gate to vec(rho) must equal vec(g rho g^dag) for a
  // random two-site rho; this is the identity the annealer relies on
  Model m = hardcoreBoseHubbard(1.0, 0.7);
  double db = 0.05;
  TwoSiteGate gate = buildGate(m, db);
  CHECK(gate.local_dim == 2);
  CHECK(gate.delta_beta == doctest::Approx(db));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseTensor rho({2, 2, 2, 2});  // (k1, b1, k2, b2)
  for (auto& x : rho.elements()) x = Complex(u(rng), u(rng));

  DenseTensor out = contract(gate.tensor, rho, {{4, 0}, {5, 1}, {6, 2}, {7, 3}});

  DenseTensor g = bondExponential(m.bondTerm(), db);
  // reference: rho'(k1,b1,k2,b2) = g(k1,k2,a,c) rho(a,b,c,e) conj(g)(b1,b2,b,e)
  DenseTensor left = contract(g, rho, {{2, 0}, {3, 2}});  // (k1,k2,b1,b2)
  DenseTensor gc = g.conjugated();
  DenseTensor ref = contract(left, gc, {{2, 2}, {3, 3}});  // (k1,k2,b1,b2)
  ref = ref.permuted({0, 2, 1, 3});
  CHECK((out - ref).maxAbs() < 1e-12);
}

TEST_CASE("single update on the identity state reproduces the gate") {
  // from beta = 0 one bond update stores exactly the Schmidt spectrum of the
  // vectorized gate; for the Ising gate that spectrum is known in closed form
  double tau = 0.2;
  VectorizedPepo p = identityPepo(2);
  p.max_bond = 4;
  Model m = isingModel(0.0);
  TwoSiteGate gate = buildGate(m, tau);
  double err = simpleUpdateBond(p, gate, BOND_AR);
  CHECK(err < 1e-12);
  checkLambdaGauge(p);
  // exp(tau szsz) (x) exp(tau szsz) acting on identity: operator Schmidt
  // values across the bond are {cosh 2tau, sinh 2tau} (each once, after the
  // ket and bra halves combine), normalized to unit maximum -> tanh(2 tau)
  REQUIRE(p.lambdas[BOND_AR].size() == 2);
  CHECK(p.lambdas[BOND_AR][1] == doctest::Approx(std::tanh(2.0 * tau)));
}

TEST_CASE("sweeps preserve lambda gauge and hermiticity") {
  Model m = softcoreBoseHubbard(1.0, 40.0, 100.0);
  VectorizedPepo p = identityPepo(3);
  p.max_bond = 2;
  TwoSiteGate gate = buildGate(m, 0.01);
  for (int sweep = 0; sweep < 25; ++sweep)
    for (BondClass b : kSweepOrder) {
      double err = simpleUpdateBond(p, gate, b);
      CHECK(err >= 0.0);
      CHECK(err < 0.5);
      checkLambdaGauge(p);
    }
  CHECK(hermiticityDeviation(p) < 1e-10);
  for (const auto& s : p.sites) CHECK(s.allFinite());
}

TEST_CASE("anneal reaches the exact thermal line") {
  // hardcore model at mu = 0 is particle-hole symmetric: no approximation in
  // the network at D = 2 for a single bond observable? Not exactly -- instead
  // pin down annealing consistency on the Ising model where the closed form
  // network is available: lambda of the annealed state must approach
  // tanh(beta) on every bond class.
  Model m = isingModel(0.0);
  VectorizedPepo p = identityPepo(2);
  AnnealSchedule sched;
  sched.delta_beta = 0.005;
  sched.beta_max = 0.3;
  sched.checkpoints = {0.1, 0.3};
  std::vector<double> betas;
  std::vector<VectorizedPepo> snaps;
  anneal(p, m, sched, 2,
         [&](const VectorizedPepo& s, const CheckpointInfo& info) {
           betas.push_back(info.beta);
           snaps.push_back(s);
           CHECK(info.hermiticity_deviation < 1e-12);
           CHECK_FALSE(info.hermiticity_warning);
           CHECK(info.max_truncation_error < 1e-10);
         });
  REQUIRE(betas.size() == 2);
  CHECK(betas[0] == doctest::Approx(0.1));
  CHECK(betas[1] == doctest::Approx(0.3));
  for (std::size_t k = 0; k < 2; ++k) {
    checkLambdaGauge(snaps[k]);
    for (int b = 0; b < 4; ++b) {
      REQUIRE(snaps[k].lambdas[b].size() == 2);
      // first-order slicing: expect agreement to O(delta_beta)
      CHECK(snaps[k].lambdas[b][1] ==
            doctest::Approx(std::tanh(betas[k])).epsilon(2e-2));
    }
  }
}

TEST_CASE("anneal validates its schedule") {
  Model m = isingModel(0.0);
  VectorizedPepo p = identityPepo(2);
  auto noop = [](const VectorizedPepo&, const CheckpointInfo&) {};

  AnnealSchedule bad;
  bad.delta_beta = -0.1;
  bad.beta_max = 1.0;
  CHECK_THROWS_AS(anneal(p, m, bad, 2, noop), ArgumentError);

  AnnealSchedule outside;
  outside.delta_beta = 0.1;
  outside.beta_max = 1.0;
  outside.checkpoints = {2.0};
  CHECK_THROWS_AS(anneal(p, m, outside, 2, noop), ArgumentError);

  AnnealSchedule zero_cp;
  zero_cp.delta_beta = 0.1;
  zero_cp.beta_max = 1.0;
  zero_cp.checkpoints = {0.0};
  CHECK_THROWS_AS(anneal(p, m, zero_cp, 2, noop), ArgumentError);
}

TEST_CASE("takagi root of a symmetric unitary") {
  std::mt19937 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4;
    // random symmetric unitary: O = W diag(e^{i phi}) W^T with W unitary
    MatrixXc w = MatrixXc::NullaryExpr(
        n, n, [&](Eigen::Index, Eigen::Index) { return Complex(g(rng), g(rng)); });
    Eigen::HouseholderQR<MatrixXc> qr(w);
    MatrixXc uq = qr.householderQ();
    Eigen::VectorXcd phases(n);
    for (int k = 0; k < n; ++k)
      phases[k] = std::exp(Complex(0.0, g(rng)));
    MatrixXc o = uq * phases.asDiagonal() * uq.transpose();

    MatrixXc q = takagiUnitary(o);
    CHECK((q * q.adjoint() - MatrixXc::Identity(n, n)).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK((q * q.transpose() - o).cwiseAbs().maxCoeff() < 1e-9);
  }
}
