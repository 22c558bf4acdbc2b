#include "crystal/lattice.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "crystal/voigt.hpp"

namespace crystal {

namespace {

Vec6 schmid_voigt(const Vec3& m, const Vec3& n) {
  const Mat3 dyad = 0.5 * (m * n.transpose() + n * m.transpose());
  return strain_to_voigt(dyad);
}

}  // namespace

Mat3 rotation_matrix(const Orientation& o) {
  const double ct = std::cos(o.theta), st = std::sin(o.theta);
  const double cp = std::cos(o.phi), sp = std::sin(o.phi);
  Mat3 t;
  t << ct * cp, ct * sp, -st,
      -sp, cp, 0.0,
      st * cp, st * sp, ct;
  return t;
}

ElasticityVoigt elasticity_voigt(double c11, double c12, double c44) {
  ElasticityVoigt e;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) e.C(i, j) = (i == j) ? c11 : c12;
    e.C(3 + i, 3 + i) = c44;
  }
  // Cubic eigenvalues are c11 + 2 c12, c11 - c12 (x2) and c44 (x3).
  Eigen::SelfAdjointEigenSolver<Mat6> es(e.C);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw SolverError("elasticity_voigt: matrix is not positive definite");
  }
  return e;
}

SlipSystems fcc_slip_systems() {
  // Dominant slip systems of an FCC single crystal: {111} planes and
  // <110> directions, table order.
  static constexpr int plane[kSlipCount][3] = {
      {1, 1, 1},   {1, 1, 1},   {1, 1, 1},
      {1, 1, -1},  {1, 1, -1},  {1, 1, -1},
      {1, -1, 1},  {1, -1, 1},  {1, -1, 1},
      {-1, 1, 1},  {-1, 1, 1},  {-1, 1, 1}};
  static constexpr int dir[kSlipCount][3] = {
      {0, 1, -1},  {1, 0, -1},  {1, -1, 0},
      {0, 1, 1},   {-1, 0, -1}, {-1, 1, 0},
      {0, 1, 1},   {-1, 0, 1},  {-1, -1, 0},
      {0, 1, -1},  {-1, 0, -1}, {-1, -1, 0}};

  SlipSystems out;
  const double im = 1.0 / std::sqrt(3.0);
  const double in = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < kSlipCount; ++a) {
    SlipSystem& s = out[a];
    s.m = im * Vec3(plane[a][0], plane[a][1], plane[a][2]);
    s.n = in * Vec3(dir[a][0], dir[a][1], dir[a][2]);
    s.M = schmid_voigt(s.m, s.n);
  }
  return out;
}

SlipSystems rotate_and_project(const SlipSystems& systems,
                               const Orientation& o,
                               const ElasticityVoigt& elasticity) {
  const Mat3 t = rotation_matrix(o);
  SlipSystems out;
  for (int a = 0; a < kSlipCount; ++a) {
    SlipSystem& s = out[a];
    s.m = t * systems[a].m;
    s.n = t * systems[a].n;
    s.M = schmid_voigt(s.m, s.n);
    s.P = elasticity.C * s.M;
  }
  return out;
}

}  // namespace crystal
