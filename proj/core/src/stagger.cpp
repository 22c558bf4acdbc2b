#include "crystal/stagger.hpp"

#include <algorithm>
#include <cmath>

#include "crystal/kinematics.hpp"

namespace crystal {

namespace {

MaterialState commit_state(const Vec6& eps_p, const Vec12& xi,
                           const Vec12& dgamma, const MaterialState& state_old,
                           const Mat3& F, const SlipSystems& systems) {
  MaterialState out;
  out.eps_p = eps_p;
  out.xi = xi;
  out.dgamma = dgamma;
  out.F_p = update_elastic_F(F, state_old.F_p, dgamma, systems).F_p;
  return out;
}

}  // namespace

FixedPointImage fixed_point_map(const Vec12& xi, const Vec6& eps,
                                const MaterialState& state_old, double dt,
                                const MaterialParams& params,
                                const SlipSystems& systems,
                                const RelaxationConfig& cfg) {
  const FlowSolution flow =
      solve_flow(eps, state_old.eps_p, xi, dt, params, systems,
                 cfg.newton_tol, cfg.newton_max_iter);
  FixedPointImage out;
  out.eps_p = flow.eps_p;
  out.dgamma = flow.dgamma;
  out.xi_image = solve_hardening(state_old.xi, flow.dgamma, params);
  return out;
}

double aitken_omega(double omega_prev, const Vec12& r_prev,
                    const Vec12& r_curr, double lo, double hi) {
  const Vec12 diff = r_prev - r_curr;
  const double denom = diff.squaredNorm();
  if (denom == 0.0) return omega_prev;  // stalled pair
  const double omega = omega_prev * (1.0 + diff.dot(r_curr) / denom);
  return std::clamp(omega, lo, hi);
}

StepResult relax_integrate(const Vec6& eps, const MaterialState& state_old,
                           double dt, const MaterialParams& params,
                           const SlipSystems& systems,
                           const RelaxationConfig& cfg, const Mat3& F) {
  StepResult out;
  RelaxationTrace& trace = out.trace;

  Vec12 xi = state_old.xi;
  FixedPointImage image =
      fixed_point_map(xi, eps, state_old, dt, params, systems, cfg);
  trace.substeps = 1;

  Vec12 r = image.xi_image - xi;
  const double r0_norm = r.norm();
  trace.residual_norms.push_back(r0_norm);

  const auto done = [&](double rn) {
    return rn <= cfg.eps_rel * r0_norm || rn <= cfg.residual_floor;
  };

  if (done(r0_norm)) {
    trace.converged = true;
    out.state = commit_state(image.eps_p, image.xi_image, image.dgamma,
                             state_old, F, systems);
    return out;
  }

  double omega = cfg.omega0;
  trace.omegas.push_back(omega);
  Vec12 r_prev = r;
  xi = (1.0 - omega) * xi + omega * image.xi_image;

  while (trace.substeps < cfg.max_substeps) {
    image = fixed_point_map(xi, eps, state_old, dt, params, systems, cfg);
    ++trace.substeps;
    r = image.xi_image - xi;
    trace.residual_norms.push_back(r.norm());

    if (done(r.norm())) {
      trace.converged = true;
      out.state = commit_state(image.eps_p, image.xi_image, image.dgamma,
                               state_old, F, systems);
      return out;
    }

    omega = aitken_omega(omega, r_prev, r, cfg.omega_min, cfg.omega_max);
    trace.omegas.push_back(omega);
    xi = (1.0 - omega) * xi + omega * image.xi_image;
    r_prev = r;
  }

  throw RelaxationError("relax_integrate: no convergence in " +
                            std::to_string(cfg.max_substeps) + " substeps",
                        trace);
}

MaterialState naive_integrate(const Vec6& eps, const MaterialState& state_old,
                              double dt, const MaterialParams& params,
                              const SlipSystems& systems, int passes,
                              const RelaxationConfig& cfg, const Mat3& F) {
  if (passes < 1) throw SolverError("naive_integrate: passes must be >= 1");
  Vec12 xi = state_old.xi;
  FixedPointImage image;
  for (int k = 0; k < passes; ++k) {
    image = fixed_point_map(xi, eps, state_old, dt, params, systems, cfg);
    xi = image.xi_image;
  }
  return commit_state(image.eps_p, xi, image.dgamma, state_old, F, systems);
}

CoupledResiduals coupled_residuals(const Vec6& eps,
                                   const MaterialState& committed,
                                   const MaterialState& state_old, double dt,
                                   const MaterialParams& params,
                                   const SlipSystems& systems) {
  // Slip increments implied by the committed state itself.
  const Vec6 elastic = eps - committed.eps_p;
  Vec12 dg;
  for (int a = 0; a < kSlipCount; ++a) {
    const double tau = systems[a].P.dot(elastic);
    dg[a] = dt * params.gamma_dot_0 * power_law(tau, committed.xi[a], params.n);
  }

  Vec6 e_eps = committed.eps_p - state_old.eps_p;
  for (int a = 0; a < kSlipCount; ++a) e_eps -= systems[a].M * dg[a];

  const Vec12 abs_dg = dg.cwiseAbs();
  Vec12 e_gamma = committed.xi - state_old.xi - params.h0 * (params.h_ab * abs_dg);
  for (int g = 0; g < kSlipCount; ++g) {
    e_gamma += params.h0 * abs_dg[g] / params.xi_inf * committed.xi[g] *
               params.h_ab.col(g);
  }

  CoupledResiduals out;
  out.flow_abs = e_eps.norm();
  out.hardening_abs = e_gamma.norm();
  out.flow_rel = out.flow_abs / std::max(eps.norm(), 1e-16);
  out.hardening_rel = out.hardening_abs / std::max(state_old.xi.norm(), 1e-16);
  return out;
}

}  // namespace crystal
