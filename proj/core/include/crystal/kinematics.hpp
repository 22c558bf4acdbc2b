#pragma once

#include <array>

#include "crystal/lattice.hpp"
#include "crystal/types.hpp"

namespace crystal {

/// Green-Lagrange strain plus the Pade-[2/2] Hencky strain derived from it
/// and the Voigt transformation between their rates.
struct StrainState {
  Vec6 E = Vec6::Zero();           // Green-Lagrange, engineering shears
  Vec6 eps = Vec6::Zero();         // approximate Hencky strain
  Mat6 deps_dE = Mat6::Identity(); // d(eps)/dE, strain-style columns
};

/// E = 1/2 (F^T F - I) in Voigt form. Requires det F > 0.
Vec6 green_lagrange(const Mat3& F);

/// Pade-[2/2] approximation of the Hencky strain,
/// eps = 3 [E.E + E] . [2 E.E + 6 E + 3 I]^-1 (symmetrized), together with
/// its first variation assembled column-by-column from the product-rule
/// expression applied to the six Voigt basis directions.
/// Throws SolverError when the denominator matrix is singular (strain
/// outside the validity range of the approximation).
StrainState pade_hencky(const Vec6& E);

/// Stress power-conjugate to E-dot: S = (deps/dE)^T sigma, so that
/// S : E-dot = sigma : eps-dot for every E-dot.
Vec6 conjugate_stress(const Vec6& sigma, const StrainState& state);

/// Material tangent in Voigt form,
///   C = (deps/dE)^T . (dsigma/deps) . (deps/dE) + sigma . d2eps/dEdE,
/// with the geometric term realized by central differencing of
/// (deps/dE)^T sigma at fixed sigma (step 1e-6 max(1, ||E||)).
Mat6 tangent_transform(const Mat6& dsigma_deps, const Vec6& sigma,
                       const Vec6& E);

/// Scalar error diagnostics for the Pade-[2/2] logarithm.
struct LogErrorBounds {
  double upper_bound = 0.0;  // bound on ||[2/2]log(-2E) - log(2E+I)||
  double err_1d = 0.0;       // exact 1D strain error at E = norm_E
};

/// upper_bound = [2/2]_log(2 normE) - log(1 - 2 normE);
/// err_1d = |eps_Pade(E) - 1/2 log(1+2E)| at the scalar E = normE.
/// Requires 2 normE < 1.
LogErrorBounds log_error_diagnostics(double norm_E);

/// Frobenius error of the diagonal Pade-[2/2] Hencky strain against the
/// exact logarithm for an isochoric principal stretch state, with E3
/// determined by det(2E + I) = 1. Requires (1+2E1)(1+2E2) > 0.
double incompressible_error(double E1, double E2);

/// Multiplicative elastic/plastic split after a converged increment.
struct ElasticSplit {
  Mat3 F_e = Mat3::Identity();
  Mat3 F_p = Mat3::Identity();
  std::array<Vec3, kSlipCount> normals{};  // push-forward F_e . m_a
};

/// F_e = F . F_p_prev^-1 . (I - sum_a m_a x n_a dgamma_a), the pushed
/// plane normals m*_a = F_e m_a, and the updated F_p = F_e^-1 F.
ElasticSplit update_elastic_F(const Mat3& F, const Mat3& Fp_prev,
                              const Vec12& dgamma, const SlipSystems& systems);

}  // namespace crystal
