#pragma once

#include "crystal/kinematics.hpp"
#include "crystal/lattice.hpp"
#include "crystal/types.hpp"

namespace crystal {

/// Hard cap on |tau/xi| inside the power law. n = 30 makes naive powering
/// overflow-prone; 4^30 is still representable, anything above aborts the
/// step with a reduce-dt diagnostic.
inline constexpr double kTauRatioCap = 4.0;

/// Lattice elasticity and hardening constants, assumed identical for all
/// twelve systems.
struct MaterialParams {
  double gamma_dot_0 = 1e-3;  // reference slip rate [1/s]
  double h0 = 75e6;           // hardening modulus [Pa]
  double xi0 = 31e6;          // initial slip resistance [Pa]
  double xi_inf = 63e6;       // saturation stress [Pa]
  double q = 1.4;             // latent-hardening ratio
  double n = 30.0;            // rate exponent
  ElasticityVoigt elasticity;
  Mat12 h_ab = Mat12::Identity();  // 1 on the diagonal, q off it

  /// Coupling matrix h_ab for a given latent ratio.
  static Mat12 coupling_matrix(double q);

  /// Conventional aluminum single-crystal constants.
  static MaterialParams aluminum();
};

/// Per-point history: plastic strain, slip resistances, plastic
/// deformation gradient and the last slip increments.
struct MaterialState {
  Vec6 eps_p = Vec6::Zero();
  Vec12 xi = Vec12::Zero();       // [Pa]
  Mat3 F_p = Mat3::Identity();
  Vec12 dgamma = Vec12::Zero();

  static MaterialState initial(const MaterialParams& p);
};

/// |tau/xi|^n sgn(tau), evaluated as exp(n log|tau/xi|). sgn(0) = 0 also
/// zeroes the flow term, so no regularization is needed at zero stress.
/// Throws past kTauRatioCap.
double power_law(double tau, double xi, double n);

/// Resolved shear stresses tau_a = P_a . (eps - eps_p) for all systems.
Vec12 resolved_tau(const Vec6& elastic_strain, const SlipSystems& systems);

struct FlowEval {
  Vec6 residual = Vec6::Zero();
  Mat6 jacobian = Mat6::Identity();
  Vec12 dgamma = Vec12::Zero();
};

/// Backward-Euler flow residual
///   e = eps_p_new - eps_p_old - dt sum_a M_a gdot0 |tau_a/xi_a|^n sgn tau_a
/// with tau_a = P_a . (eps - eps_p_new), its 6x6 Jacobian
///   J = I + dt sum_a (M_a x P_a) n gdot0 / xi_a |tau_a/xi_a|^(n-1),
/// and the slip increments of the current iterate.
FlowEval flow_residual_jacobian(const Vec6& eps, const Vec6& eps_p_new,
                                const Vec6& eps_p_old, const Vec12& xi,
                                double dt, const MaterialParams& params,
                                const SlipSystems& systems);

struct FlowSolution {
  Vec6 eps_p = Vec6::Zero();
  Vec12 dgamma = Vec12::Zero();
  int iterations = 0;
};

/// Newton iteration on the flow residual at frozen slip resistances
/// (the operator Gamma of the staggered scheme). Initial guess is
/// eps_p_old. Converged when ||e|| <= tol max(1, ||eps_p_old|| + ||e0||).
FlowSolution solve_flow(const Vec6& eps, const Vec6& eps_p_old,
                        const Vec12& xi, double dt,
                        const MaterialParams& params,
                        const SlipSystems& systems, double tol = 1e-13,
                        int max_iter = 50);

/// Implicit saturation-hardening update: solves the dense linear system
///   (delta_ag + h0 h_ag |dgamma_g| / xi_inf) xi_new_g
///     = xi_old_a + h0 sum_b h_ab |dgamma_b|
/// (the operator Xi of the staggered scheme). |dgamma| is data here, so
/// the system is linear in xi exactly.
Vec12 solve_hardening(const Vec12& xi_old, const Vec12& dgamma,
                      const MaterialParams& params);

struct PredictorResult {
  Vec12 dgamma = Vec12::Zero();
  bool ok = true;  // false when the active-set system was singular
};

/// Optional forward-Euler slip estimate: restricted to the active set
/// {a : |tau*_a| >= xi_old_a}, solves
///   tau*_a - s_a (xi_old_a + T_ab s_b dg_b) - (P_a . M_b) dg_b = 0,
/// dropping systems with tau*_a dg_a < 0 and re-solving (up to 12 passes).
PredictorResult hardening_predictor(const Vec12& xi_old,
                                    const Vec12& tau_trial,
                                    const SlipSystems& systems,
                                    const MaterialParams& params);

struct StressResult {
  Vec6 sigma = Vec6::Zero();        // conjugate to the Hencky strain
  Vec6 S = Vec6::Zero();            // second Piola-Kirchhoff, Voigt
  Mat6 dsigma_deps = Mat6::Zero();  // consistent reduction C J^-1
  Mat6 tangent = Mat6::Zero();      // full Voigt tangent w.r.t. E
};

/// Stress recovery and algorithmically consistent tangent at a converged
/// state: sigma = C (eps - eps_p), S = (deps/dE)^T sigma, and
/// dsigma/deps = C J^-1 from the implicit-function theorem applied to the
/// converged flow Jacobian (the dgamma/xi cross-coupling is left to the
/// staggered iteration by design).
StressResult stress_and_tangent(const Vec6& eps, const Vec6& eps_p,
                                const Vec12& xi, double dt,
                                const MaterialParams& params,
                                const SlipSystems& systems,
                                const StrainState& strain_state);

}  // namespace crystal
