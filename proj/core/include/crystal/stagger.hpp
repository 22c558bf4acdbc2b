#pragma once

#include <vector>

#include "crystal/constitutive.hpp"
#include "crystal/types.hpp"

namespace crystal {

/// Controls for the dynamic-relaxation loop and the inner flow Newton.
struct RelaxationConfig {
  double omega0 = 0.5;          // initial relaxation coefficient
  double eps_rel = 1e-8;        // relative residual tolerance
  int max_substeps = 200;
  double omega_min = 0.05;      // clamp keeping omega inside ]0, 2[
  double omega_max = 1.95;
  double residual_floor = 1e-3; // [Pa] absolute exit, handles r0 = 0 steps
  double newton_tol = 1e-13;
  int newton_max_iter = 50;
};

/// Per-substep record of the relaxation loop.
struct RelaxationTrace {
  std::vector<double> residual_norms;  // ||r_i|| [Pa]
  std::vector<double> omegas;
  int substeps = 0;                    // operator evaluations
  bool converged = false;
};

/// relax_integrate failure, trace attached for diagnosis.
class RelaxationError : public SolverError {
 public:
  RelaxationError(const std::string& what, RelaxationTrace trace)
      : SolverError(what, trace.residual_norms.empty()
                              ? 0.0
                              : trace.residual_norms.back()),
        trace_(std::move(trace)) {}
  const RelaxationTrace& trace() const noexcept { return trace_; }

 private:
  RelaxationTrace trace_;
};

struct FixedPointImage {
  Vec12 xi_image = Vec12::Zero();  // hardening solve output
  Vec12 dgamma = Vec12::Zero();
  Vec6 eps_p = Vec6::Zero();
};

/// One application of the coupled map: flow solve at frozen xi, then the
/// linear hardening solve with the resulting slip increments. Its fixed
/// point solves the coupled constitutive system of the time step.
FixedPointImage fixed_point_map(const Vec12& xi, const Vec6& eps,
                                const MaterialState& state_old, double dt,
                                const MaterialParams& params,
                                const SlipSystems& systems,
                                const RelaxationConfig& cfg = {});

/// Aitken-type coefficient update
///   omega = omega_prev [1 + (r_prev - r_curr).r_curr / ||r_prev - r_curr||^2],
/// clamped to [lo, hi]. Returns omega_prev unchanged on a stalled pair.
double aitken_omega(double omega_prev, const Vec12& r_prev,
                    const Vec12& r_curr, double lo, double hi);

struct StepResult {
  MaterialState state;
  RelaxationTrace trace;
};

/// Implicit staggered step by dynamic relaxation: starting from
/// xi^0 = xi_s, alternates the coupled map with relaxed updates
/// xi^{i+1} = (1 - omega_i) xi^i + omega_i xi~^{i+1} until
/// ||r_i|| <= eps_rel ||r_0|| (or the absolute floor). Commits eps_p, xi,
/// dgamma and F_p (multiplicative update with the supplied F).
StepResult relax_integrate(const Vec6& eps, const MaterialState& state_old,
                           double dt, const MaterialParams& params,
                           const SlipSystems& systems,
                           const RelaxationConfig& cfg = {},
                           const Mat3& F = Mat3::Identity());

/// Drift-exhibiting baseline: alternates flow and hardening solves a fixed
/// number of passes with no relaxation and no convergence check.
MaterialState naive_integrate(const Vec6& eps, const MaterialState& state_old,
                              double dt, const MaterialParams& params,
                              const SlipSystems& systems, int passes,
                              const RelaxationConfig& cfg = {},
                              const Mat3& F = Mat3::Identity());

/// Residuals of the two boxed coupled equations re-evaluated at a
/// committed state, with the slip increments recomputed from that state
/// through the flow law (so a state committed by an unconverged split
/// shows its inconsistency).
struct CoupledResiduals {
  double flow_abs = 0.0;       // ||e_eps||
  double hardening_abs = 0.0;  // ||e_gamma|| [Pa]
  double flow_rel = 0.0;       // relative to ||eps||
  double hardening_rel = 0.0;  // relative to ||xi_s||
};

CoupledResiduals coupled_residuals(const Vec6& eps,
                                   const MaterialState& committed,
                                   const MaterialState& state_old, double dt,
                                   const MaterialParams& params,
                                   const SlipSystems& systems);

}  // namespace crystal
