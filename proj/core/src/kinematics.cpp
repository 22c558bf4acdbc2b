#include "crystal/kinematics.hpp"

#include <cmath>

#include "crystal/voigt.hpp"

namespace crystal {

namespace {

// Voigt basis directions as strain tensors: unit engineering component.
Mat3 voigt_basis_tensor(int k) {
  Mat3 b = Mat3::Zero();
  switch (k) {
    case 0: b(0, 0) = 1.0; break;
    case 1: b(1, 1) = 1.0; break;
    case 2: b(2, 2) = 1.0; break;
    case 3: b(1, 2) = b(2, 1) = 0.5; break;
    case 4: b(0, 2) = b(2, 0) = 0.5; break;
    case 5: b(0, 1) = b(1, 0) = 0.5; break;
  }
  return b;
}

// Scalar [2/2]_log(a), the Pade approximation of log(1 - a).
double pade22_log_one_minus(double a) {
  return 3.0 * (a * a - 2.0 * a) / (a * a - 6.0 * a + 6.0);
}

}  // namespace

Vec6 green_lagrange(const Mat3& F) {
  if (F.determinant() <= 0.0) {
    throw SolverError("green_lagrange: det F <= 0");
  }
  const Mat3 E = 0.5 * (F.transpose() * F - Mat3::Identity());
  return strain_to_voigt(E);
}

StrainState pade_hencky(const Vec6& E_voigt) {
  const Mat3 E = voigt_to_strain(E_voigt);
  const Mat3 EE = E * E;
  const Mat3 num = 3.0 * (EE + E);
  const Mat3 den = 2.0 * EE + 6.0 * E + 3.0 * Mat3::Identity();

  Eigen::FullPivLU<Mat3> lu(den);
  if (!lu.isInvertible()) {
    throw SolverError(
        "pade_hencky: singular denominator, strain outside Pade validity");
  }
  const Mat3 den_inv = lu.inverse();

  StrainState out;
  out.E = E_voigt;
  const Mat3 eps = num * den_inv;
  out.eps = strain_to_voigt(0.5 * (eps + eps.transpose()));

  // First variation applied to the six Voigt basis directions.
  for (int k = 0; k < 6; ++k) {
    const Mat3 dE = voigt_basis_tensor(k);
    const Mat3 dnum = 3.0 * (dE * E + E * dE + dE);
    const Mat3 dden = 2.0 * dE * E + 2.0 * E * dE + 6.0 * dE;
    const Mat3 deps = dnum * den_inv - num * den_inv * dden * den_inv;
    out.deps_dE.col(k) = strain_to_voigt(0.5 * (deps + deps.transpose()));
  }
  return out;
}

Vec6 conjugate_stress(const Vec6& sigma, const StrainState& state) {
  return state.deps_dE.transpose() * sigma;
}

Mat6 tangent_transform(const Mat6& dsigma_deps, const Vec6& sigma,
                       const Vec6& E) {
  const StrainState ss = pade_hencky(E);
  Mat6 tangent = ss.deps_dE.transpose() * dsigma_deps * ss.deps_dE;

  // Geometric term sigma . d2eps/dEdE by directional differencing of the
  // conjugate map at fixed sigma; only this contraction is ever needed.
  const double h = 1e-6 * std::max(1.0, strain_frobenius_norm(E));
  for (int k = 0; k < 6; ++k) {
    Vec6 Ep = E, Em = E;
    Ep[k] += h;
    Em[k] -= h;
    const Vec6 sp = pade_hencky(Ep).deps_dE.transpose() * sigma;
    const Vec6 sm = pade_hencky(Em).deps_dE.transpose() * sigma;
    tangent.col(k) += (sp - sm) / (2.0 * h);
  }
  return tangent;
}

LogErrorBounds log_error_diagnostics(double norm_E) {
  if (!(2.0 * norm_E < 1.0)) {
    throw SolverError("log_error_diagnostics: bound undefined for 2||E|| >= 1");
  }
  if (norm_E < 0.0) {
    throw SolverError("log_error_diagnostics: negative norm");
  }
  LogErrorBounds out;
  out.upper_bound =
      pade22_log_one_minus(2.0 * norm_E) - std::log1p(-2.0 * norm_E);
  out.err_1d = 0.5 * std::abs(pade22_log_one_minus(-2.0 * norm_E) -
                              std::log1p(2.0 * norm_E));
  return out;
}

double incompressible_error(double E1, double E2) {
  const double g = 1.0 + 2.0 * E1 + 2.0 * E2 + 4.0 * E1 * E2;
  if (g <= 0.0) {
    throw SolverError("incompressible_error: degenerate stretch");
  }
  const double E3 = 0.5 * (-1.0 + 1.0 / g);

  const auto pade_diag = [](double e) {
    return 3.0 * e * (1.0 + e) / (3.0 + 2.0 * e * (3.0 + e));
  };
  const double d1 = 0.5 * std::log1p(2.0 * E1) - pade_diag(E1);
  const double d2 = 0.5 * std::log1p(2.0 * E2) - pade_diag(E2);
  const double d3 = 0.5 * std::log1p(2.0 * E3) - pade_diag(E3);
  return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
}

ElasticSplit update_elastic_F(const Mat3& F, const Mat3& Fp_prev,
                              const Vec12& dgamma,
                              const SlipSystems& systems) {
  if (std::abs(Fp_prev.determinant()) < 1e-14) {
    throw SolverError("update_elastic_F: singular previous F_p");
  }
  Mat3 slip = Mat3::Identity();
  for (int a = 0; a < kSlipCount; ++a) {
    slip -= dgamma[a] * (systems[a].m * systems[a].n.transpose());
  }
  ElasticSplit out;
  out.F_e = F * Fp_prev.inverse() * slip;
  if (std::abs(out.F_e.determinant()) < 1e-14) {
    throw SolverError("update_elastic_F: singular elastic deformation");
  }
  out.F_p = out.F_e.inverse() * F;
  for (int a = 0; a < kSlipCount; ++a) {
    out.normals[a] = out.F_e * systems[a].m;
  }
  return out;
}

}  // namespace crystal
