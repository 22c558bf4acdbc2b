#include <doctest.h>

#include <cmath>
#include <random>

#include "crystal/kinematics.hpp"
#include "crystal/voigt.hpp"
#include "oracles.hpp"

using namespace crystal;

TEST_SUITE_BEGIN("kinematics");

TEST_CASE("green lagrange of simple states") {
  CHECK(green_lagrange(Mat3::Identity()).norm() == 0.0);

  Mat3 F = Mat3::Identity();
  F(0, 0) = 1.1;
  const Vec6 e = green_lagrange(F);
  CHECK(e[0] == doctest::Approx(0.105).epsilon(1e-14));
  CHECK(e.tail(5).norm() == 0.0);

  const double g = 0.2;
  Mat3 shear = Mat3::Identity();
  shear(0, 1) = g;
  const Vec6 es = green_lagrange(shear);
  CHECK(es[5] == doctest::Approx(g).epsilon(1e-14));          // engineering 12
  CHECK(es[1] == doctest::Approx(0.5 * g * g).epsilon(1e-14));
  CHECK(es[0] == 0.0);

  Mat3 flipped = Mat3::Identity();
  flipped(2, 2) = -1.0;
  CHECK_THROWS_AS(green_lagrange(flipped), SolverError);
}

TEST_CASE("pade hencky at the expansion point") {
  const StrainState s = pade_hencky(Vec6::Zero());
  CHECK(s.eps.norm() == 0.0);
  CHECK((s.deps_dE - Mat6::Identity()).norm() < 1e-12);
}

TEST_CASE("pade hencky scalar value against the logarithm") {
  Vec6 E = Vec6::Zero();
  E[0] = 0.05;  // 2E = 0.1
  const StrainState s = pade_hencky(E);
  CHECK(s.eps[0] == doctest::Approx(0.0476550).epsilon(2e-6));
  CHECK(std::abs(s.eps[0] - 0.5 * std::log(1.1)) < 5e-8);
  CHECK(s.eps.tail(5).norm() < 1e-16);
}

TEST_CASE("first variation matches central finite differences") {
  std::mt19937 rng(3);
  for (double norm : {0.1, 0.2, 0.3}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vec6 E = strain_to_voigt(oracle::random_symmetric(rng, norm));
      const StrainState s = pade_hencky(E);
      const double h = 1e-6;
      Mat6 fd;
      for (int k = 0; k < 6; ++k) {
        Vec6 Ep = E, Em = E;
        Ep[k] += h;
        Em[k] -= h;
        fd.col(k) = (pade_hencky(Ep).eps - pade_hencky(Em).eps) / (2.0 * h);
      }
      CHECK((fd - s.deps_dE).norm() / s.deps_dE.norm() < 1e-6);
    }
  }
}

TEST_CASE("pade strain against the exact log within the bound") {
  std::mt19937 rng(17);
  // The inequality drops below the double-precision floor near zero.
  std::uniform_real_distribution<double> ndist(0.01, 0.2);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat3 E = oracle::random_symmetric(rng, ndist(rng));
    const Mat3 exact =
        0.5 * oracle::log_spd(2.0 * E + Mat3::Identity());
    const Mat3 pade = voigt_to_strain(pade_hencky(strain_to_voigt(E)).eps);
    const double err = (pade - exact).norm();
    CHECK(err <= log_error_diagnostics(E.norm()).upper_bound);
  }
}

TEST_CASE("pade denominator singularity is reported") {
  // 2E^2 + 6E + 3I is singular when an eigenvalue of E hits
  // (-3 + sqrt(3))/2.
  Vec6 E = Vec6::Zero();
  E[0] = 0.5 * (-3.0 + std::sqrt(3.0));
  CHECK_THROWS_AS(pade_hencky(E), SolverError);
}

TEST_CASE("conjugate stress reduces to sigma at zero strain") {
  const StrainState s = pade_hencky(Vec6::Zero());
  Vec6 sigma;
  sigma << 1e6, -2e6, 3e6, 4e5, -5e5, 6e5;
  CHECK((conjugate_stress(sigma, s) - sigma).norm() < 1e-6);
}

TEST_CASE("conjugate stress closed form for a uniaxial state") {
  const double e = 0.12;
  Vec6 E = Vec6::Zero();
  E[0] = e;
  const StrainState s = pade_hencky(E);
  Vec6 sigma;
  sigma << 2e8, -1e8, 5e7, 0, 0, 0;
  const Vec6 S = conjugate_stress(sigma, s);

  // d/de of 3e(1+e) / (3 + 2e(3+e))
  const double num = 3.0 * e + 3.0 * e * e;
  const double den = 3.0 + 6.0 * e + 2.0 * e * e;
  const double dnum = 3.0 + 6.0 * e;
  const double dden = 6.0 + 4.0 * e;
  const double fprime = (dnum * den - num * dden) / (den * den);

  CHECK(S[0] == doctest::Approx(fprime * sigma[0]).epsilon(1e-10));
  CHECK(S[1] == doctest::Approx(sigma[1]).epsilon(1e-10));
  CHECK(S[2] == doctest::Approx(sigma[2]).epsilon(1e-10));
  CHECK(S.tail(3).norm() < 1e-6);
}

TEST_CASE("conjugate stress preserves power") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec6 E = strain_to_voigt(oracle::random_symmetric(rng, 0.15));
    const StrainState s = pade_hencky(E);
    Vec6 sigma, Edot;
    for (int i = 0; i < 6; ++i) {
      sigma[i] = 1e8 * dist(rng);
      Edot[i] = dist(rng);
    }
    const double lhs = conjugate_stress(sigma, s).dot(Edot);
    const double rhs = sigma.dot(s.deps_dE * Edot);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
  }
}

TEST_CASE("tangent transform is the identity chain at zero state") {
  Mat6 d = Mat6::Random();
  d = 0.5 * (d + d.transpose());
  const Mat6 t = tangent_transform(d, Vec6::Zero(), Vec6::Zero());
  CHECK((t - d).norm() / d.norm() < 1e-10);
}

TEST_CASE("tangent transform matches finite differences of the elastic law") {
  const ElasticityVoigt el = elasticity_voigt(106.75e9, 60.41e9, 28.34e9);
  std::mt19937 rng(31);

  const auto S_of_E = [&](const Vec6& E) {
    const StrainState s = pade_hencky(E);
    return conjugate_stress(el.C * s.eps, s);
  };

  for (int trial = 0; trial < 5; ++trial) {
    const Vec6 E = strain_to_voigt(oracle::random_symmetric(rng, 0.1));
    const StrainState s = pade_hencky(E);
    const Vec6 sigma = el.C * s.eps;
    const Mat6 tangent = tangent_transform(el.C, sigma, E);

    const double h = 1e-7;
    Mat6 fd;
    for (int k = 0; k < 6; ++k) {
      Vec6 Ep = E, Em = E;
      Ep[k] += h;
      Em[k] -= h;
      fd.col(k) = (S_of_E(Ep) - S_of_E(Em)) / (2.0 * h);
    }
    CHECK((fd - tangent).norm() / tangent.norm() < 1e-5);
    CHECK((tangent - tangent.transpose()).norm() / tangent.norm() < 1e-8);
  }
}

TEST_CASE("log error diagnostics") {
  const LogErrorBounds zero = log_error_diagnostics(0.0);
  CHECK(zero.upper_bound == 0.0);
  CHECK(zero.err_1d == 0.0);

  // 1D error sits under half the matrix bound on a grid.
  for (int i = 1; i <= 30; ++i) {
    const double e = 0.01 * i;
    const LogErrorBounds b = log_error_diagnostics(e);
    CHECK(b.err_1d <= 0.5 * b.upper_bound + 1e-18);
  }

  // Monotone bound up to 0.4.
  double prev = 0.0;
  for (int i = 1; i <= 40; ++i) {
    const double ub = log_error_diagnostics(0.01 * i).upper_bound;
    CHECK(ub > prev);
    prev = ub;
  }

  CHECK_THROWS_AS(log_error_diagnostics(0.5), SolverError);
}

TEST_CASE("incompressible error values") {
  CHECK(incompressible_error(0.0, 0.0) == 0.0);

  // The corner of the paper's grid.
  const double corner = incompressible_error(0.65, 0.65);
  CHECK(corner == doctest::Approx(0.0258).epsilon(0.02));

  CHECK_THROWS_AS(incompressible_error(-0.5, -0.5), SolverError);
}

TEST_CASE("incompressible error is symmetric in its arguments") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-0.25, 0.65);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = dist(rng), b = dist(rng);
    CHECK(incompressible_error(a, b) ==
          doctest::Approx(incompressible_error(b, a)).epsilon(1e-13));
  }
}

TEST_CASE("elastic split with no plastic flow") {
  const SlipSystems sys = fcc_slip_systems();
  Mat3 F = Mat3::Identity();
  F(2, 2) = 1.2;
  F(0, 1) = 0.05;
  const ElasticSplit split =
      update_elastic_F(F, Mat3::Identity(), Vec12::Zero(), sys);
  CHECK((split.F_e - F).norm() < 1e-14);
  CHECK((split.F_p - Mat3::Identity()).norm() < 1e-14);
  for (int a = 0; a < kSlipCount; ++a) {
    CHECK((split.normals[a] - F * sys[a].m).norm() < 1e-14);
  }
}

TEST_CASE("elastic split with a single slip increment") {
  const SlipSystems sys = fcc_slip_systems();
  Vec12 dgamma = Vec12::Zero();
  dgamma[0] = 0.02;
  const ElasticSplit split =
      update_elastic_F(Mat3::Identity(), Mat3::Identity(), dgamma, sys);
  const Mat3 expect =
      Mat3::Identity() - dgamma[0] * (sys[0].m * sys[0].n.transpose());
  CHECK((split.F_e - expect).norm() < 1e-14);
  CHECK((split.F_e * split.F_p - Mat3::Identity()).norm() < 1e-14);
}

TEST_CASE("elastic split keeps positive determinant for small slips") {
  const SlipSystems sys = fcc_slip_systems();
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec12 dgamma;
    for (int a = 0; a < kSlipCount; ++a) dgamma[a] = dist(rng);
    dgamma *= 0.1 / std::max(dgamma.norm(), 1e-12);
    const ElasticSplit split =
        update_elastic_F(Mat3::Identity(), Mat3::Identity(), dgamma, sys);
    CHECK(split.F_e.determinant() > 0.0);
  }
}

TEST_CASE("singular previous plastic gradient is rejected") {
  const SlipSystems sys = fcc_slip_systems();
  CHECK_THROWS_AS(
      update_elastic_F(Mat3::Identity(), Mat3::Zero(), Vec12::Zero(), sys),
      SolverError);
}

TEST_SUITE_END();
