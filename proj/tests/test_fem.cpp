#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "spde/fem.hpp"

using namespace spde;

namespace {

Eigen::VectorXd randomVector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

// evaluates the piecewise-linear function with given interior nodal values
double evalP1(const Mesh1D& mesh, const Eigen::VectorXd& values, double x) {
  const double r = (x - mesh.a) / mesh.h;
  const int cell = std::min(mesh.n_interior, std::max(0, static_cast<int>(r)));
  const double w = r - cell;
  auto nodal = [&](int i) {
    return (i >= 1 && i <= mesh.n_interior) ? values[i - 1] : 0.0;
  };
  return (1.0 - w) * nodal(cell) + w * nodal(cell + 1);
}

}  // namespace

TEST_CASE("mesh invariants") {
  Mesh1D mesh(0.0, 1.0, 7);
  CHECK(mesh.h == doctest::Approx(0.125).epsilon(1e-15));
  for (int i = 0; i <= 8; ++i) CHECK(mesh.node(i) == i * mesh.h);
  CHECK_THROWS_AS(Mesh1D(1.0, 0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(Mesh1D(0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("mass matrix: single interior node on [0,1]") {
  Mesh1D mesh(0.0, 1.0, 1);
  TriDiag m = assembleMass(mesh);
  REQUIRE(m.size() == 1);
  CHECK(m.diag[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("mass matrix: uniform stencil h/6*(1,4,1)") {
  Mesh1D mesh(0.0, 1.0, 3);
  const double h = 0.25;
  TriDiag m = assembleMass(mesh);
  for (int i = 0; i < 3; ++i)
    CHECK(m.diag[i] == doctest::Approx(2.0 * h / 3.0).epsilon(1e-14));
  for (int i = 0; i < 2; ++i) {
    CHECK(m.upper[i] == doctest::Approx(h / 6.0).epsilon(1e-14));
    CHECK(m.lower[i] == doctest::Approx(h / 6.0).epsilon(1e-14));
  }
}

TEST_CASE("mass matrix: symmetric positive definite") {
  Mesh1D mesh(-1.0, 2.0, 17);
  TriDiag m = assembleMass(mesh);
  CHECK(m.isSymmetric(1e-15));
  for (unsigned seed = 1; seed <= 5; ++seed) {
    Eigen::VectorXd v = randomVector(17, seed);
    CHECK(weightedInner(m, v, v) > 0.0);
  }
}

TEST_CASE("stiffness: q=1 gives (1/h) tri(-1,2,-1)") {
  Mesh1D mesh(0.0, 1.0, 7);
  OperatorFamily ops = constantCoefficients(1.0);
  TriDiag k = assembleStiffness(mesh, ops, 0.3);
  const double inv_h = 1.0 / mesh.h;
  for (int i = 0; i < 7; ++i)
    CHECK(k.diag[i] == doctest::Approx(2.0 * inv_h).epsilon(1e-13));
  for (int i = 0; i < 6; ++i) {
    CHECK(k.upper[i] == doctest::Approx(-inv_h).epsilon(1e-13));
    CHECK(k.lower[i] == doctest::Approx(-inv_h).epsilon(1e-13));
  }
}

TEST_CASE("stiffness: time-independent coefficients give identical matrices") {
  Mesh1D mesh(0.0, 2.0, 9);
  OperatorFamily ops = constantCoefficients(1.7);
  TriDiag k1 = assembleStiffness(mesh, ops, 0.1);
  TriDiag k2 = assembleStiffness(mesh, ops, 0.9);
  CHECK((k1.dense() - k2.dense()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stiffness: constant advection adds skew tri(-1/2, 0, 1/2)") {
  Mesh1D mesh(0.0, 1.0, 7);
  OperatorFamily ops = withConstantAdvection(constantCoefficients(1.0), 1.0);
  TriDiag k = assembleStiffness(mesh, ops, 0.0);
  const double inv_h = 1.0 / mesh.h;
  for (int i = 0; i < 7; ++i)
    CHECK(k.diag[i] == doctest::Approx(2.0 * inv_h).epsilon(1e-13));
  for (int i = 0; i < 6; ++i) {
    CHECK(k.upper[i] == doctest::Approx(-inv_h + 0.5).epsilon(1e-12));
    CHECK(k.lower[i] == doctest::Approx(-inv_h - 0.5).epsilon(1e-12));
  }
  // symmetric part is exactly the diffusion stiffness
  TriDiag sym = k.symmetricPart();
  TriDiag diffusion = assembleStiffness(mesh, constantCoefficients(1.0), 0.0);
  CHECK((sym.dense() - diffusion.dense()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stiffness: ellipticity floor violation is rejected") {
  Mesh1D mesh(0.0, 1.0, 7);
  OperatorFamily ops;
  ops.diffusion = [](double x, double) { return x < 0.5 ? 1.0 : 0.01; };
  ops.advection = [](double, double) { return 0.0; };
  ops.ellipticity_floor = 0.1;
  CHECK_THROWS_AS(assembleStiffness(mesh, ops, 0.0), std::domain_error);
}

TEST_CASE("stiffness: ellipticity bound against the q=1 stiffness") {
  Mesh1D mesh(0.0, 1.0, 15);
  OperatorFamily ops = timeSineCoefficients(1.0, 1.0);
  TriDiag g = assembleStiffness(mesh, constantCoefficients(1.0), 0.0);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double t = uniform(rng);
    TriDiag k = assembleStiffness(mesh, ops, t);
    Eigen::VectorXd v = randomVector(15, 100 + trial);
    CHECK(v.dot(k.symmetricPart().apply(v)) >=
          ops.ellipticity_floor * v.dot(g.apply(v)) - 1e-12);
  }
}

TEST_CASE("l2 projection: identity on V_h members") {
  Mesh1D mesh(0.0, 1.0, 12);
  TriDiag m = assembleMass(mesh);
  Eigen::VectorXd v = randomVector(12, 7);
  auto f = [&](double x) { return evalP1(mesh, v, x); };
  Eigen::VectorXd c = l2Project(mesh, m, f);
  CHECK((c - v).cwiseAbs().maxCoeff() < 1e-11);
  // projecting the projection again changes nothing (idempotency)
  auto g = [&](double x) { return evalP1(mesh, c, x); };
  Eigen::VectorXd c2 = l2Project(mesh, m, g);
  CHECK((c2 - c).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("l2 projection: zero function") {
  Mesh1D mesh(0.0, 1.0, 5);
  TriDiag m = assembleMass(mesh);
  Eigen::VectorXd c = l2Project(mesh, m, [](double) { return 0.0; });
  CHECK(c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("l2 projection: sin(pi x) accurate to O(h^2)") {
  Mesh1D mesh(0.0, 1.0, 63);  // h = 1/64
  TriDiag m = assembleMass(mesh);
  auto f = [](double x) { return std::sin(std::numbers::pi * x); };
  Eigen::VectorXd c = l2Project(mesh, m, f);
  // oracle route: loads from 8x refined quadrature
  Eigen::VectorXd oracle = m.solve(assembleLoadRefined(mesh, f, 8));
  const double h2 = mesh.h * mesh.h;
  double dev = 0.0, dev_oracle = 0.0;
  for (int i = 1; i <= mesh.n_interior; ++i) {
    dev = std::max(dev, std::abs(c[i - 1] - f(mesh.node(i))));
    dev_oracle = std::max(dev_oracle, std::abs(oracle[i - 1] - f(mesh.node(i))));
  }
  CHECK(dev <= 10.0 * h2);
  CHECK(dev_oracle <= 10.0 * h2);
  CHECK((c - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("sine mode load matches refined quadrature") {
  Mesh1D mesh(0.0, 1.0, 19);
  const int k = 3;
  auto e_k = [&](double x) {
    return std::sqrt(2.0) * std::sin(k * std::numbers::pi * x);
  };
  Eigen::VectorXd exact = sineModeLoad(mesh, k);
  Eigen::VectorXd quad = assembleLoadRefined(mesh, e_k, 64);
  CHECK((exact - quad).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("generalized eigendecomposition: identity mass, diagonal K") {
  TriDiag m(3), k(3);
  m.diag = Eigen::Vector3d::Ones();
  k.diag = Eigen::Vector3d(3.0, 1.0, 2.0);
  GeneralizedEig eig = generalizedEigendecomposition(m, k);
  CHECK(eig.values[0] == doctest::Approx(1.0));
  CHECK(eig.values[1] == doctest::Approx(2.0));
  CHECK(eig.values[2] == doctest::Approx(3.0));
  Eigen::MatrixXd gram = eig.vectors.transpose() * eig.vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("generalized eigendecomposition: P1 dispersion closed form") {
  Mesh1D mesh(0.0, 1.0, 31);
  const double h = mesh.h;
  TriDiag m = assembleMass(mesh);
  TriDiag k = assembleStiffness(mesh, constantCoefficients(1.0), 0.0);
  GeneralizedEig eig = generalizedEigendecomposition(m, k);
  for (int mode = 1; mode <= mesh.n_interior; ++mode) {
    const double c = std::cos(mode * std::numbers::pi * h);
    const double exact = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
    CHECK(eig.values[mode - 1] ==
          doctest::Approx(exact).epsilon(1e-10));
  }
  // independent dense route: eigenvalues of M^{-1} K
  Eigen::MatrixXd op = m.dense().partialPivLu().solve(k.dense());
  Eigen::VectorXd direct = Eigen::EigenSolver<Eigen::MatrixXd>(op)
                               .eigenvalues()
                               .real();
  std::sort(direct.begin(), direct.end());
  for (int i = 0; i < mesh.n_interior; ++i)
    CHECK(direct[i] == doctest::Approx(eig.values[i]).epsilon(1e-8));
}

TEST_CASE("generalized eigendecomposition: M-orthonormal and reconstructs K") {
  Mesh1D mesh(0.0, 1.5, 21);
  TriDiag m = assembleMass(mesh);
  TriDiag k = assembleStiffness(mesh, timeSineCoefficients(2.0, 1.0), 0.37);
  GeneralizedEig eig = generalizedEigendecomposition(m, k);
  CHECK(eig.values.minCoeff() > 0.0);
  Eigen::MatrixXd gram = eig.vectors.transpose() * m.dense() * eig.vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(21, 21)).cwiseAbs().maxCoeff() <
        1e-11);
  Eigen::MatrixXd rebuilt = m.dense() * eig.vectors *
                            eig.values.asDiagonal() * eig.vectors.transpose() *
                            m.dense();
  CHECK((rebuilt - k.dense()).cwiseAbs().maxCoeff() <=
        1e-10 * k.dense().cwiseAbs().maxCoeff());
}

TEST_CASE("generalized eigendecomposition: rejects non-symmetric K") {
  Mesh1D mesh(0.0, 1.0, 5);
  TriDiag m = assembleMass(mesh);
  TriDiag k =
      assembleStiffness(mesh, withConstantAdvection(constantCoefficients(1.0), 2.0), 0.0);
  CHECK_THROWS_AS(generalizedEigendecomposition(m, k), std::invalid_argument);
  CHECK_NOTHROW(generalizedEigendecomposition(m, k.symmetricPart()));
}

TEST_CASE("fractional powers") {
  Mesh1D mesh(0.0, 1.0, 16);
  TriDiag m = assembleMass(mesh);
  TriDiag k = assembleStiffness(mesh, constantCoefficients(1.0), 0.0);
  GeneralizedEig eig = generalizedEigendecomposition(m, k);
  Eigen::VectorXd v = randomVector(16, 3);

  SUBCASE("alpha = 0 returns the input exactly") {
    Eigen::VectorXd w = fractionalPowerApply(eig, m, 0.0, v);
    CHECK((w - v).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("eigenvector with alpha = 1 scales by the eigenvalue") {
    Eigen::VectorXd vk = eig.vectors.col(4);
    Eigen::VectorXd w = fractionalPowerApply(eig, m, 1.0, vk);
    CHECK((w - eig.values[4] * vk).cwiseAbs().maxCoeff() <
          1e-10 * eig.values[4]);
  }
  SUBCASE("half power applied twice equals the full power") {
    Eigen::VectorXd twice =
        fractionalPowerApply(eig, m, 0.5, fractionalPowerApply(eig, m, 0.5, v));
    Eigen::VectorXd full = fractionalPowerApply(eig, m, 1.0, v);
    CHECK((twice - full).norm() <= 1e-10 * full.norm());
  }
  SUBCASE("alpha outside [-1,1] rejected") {
    CHECK_THROWS_AS(fractionalPowerApply(eig, m, 1.5, v), std::invalid_argument);
  }
}

TEST_CASE("smallest eigenvalue converges to pi^2 at rate 2h^2") {
  for (int n : {31, 63}) {  // h = 2^-5, 2^-6
    Mesh1D mesh(0.0, 1.0, n);
    TriDiag m = assembleMass(mesh);
    TriDiag k = assembleStiffness(mesh, constantCoefficients(1.0), 0.0);
    GeneralizedEig eig = generalizedEigendecomposition(m, k);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double rel = std::abs(eig.values[0] - pi2) / pi2;
    CHECK(rel <= 2.0 * mesh.h * mesh.h);
  }
}
