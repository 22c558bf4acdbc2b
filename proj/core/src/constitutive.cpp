#include "crystal/constitutive.hpp"

#include <cmath>
#include <vector>

#include "crystal/voigt.hpp"

namespace crystal {

Mat12 MaterialParams::coupling_matrix(double q) {
  Mat12 h = Mat12::Constant(q);
  h.diagonal().setOnes();
  return h;
}

MaterialParams MaterialParams::aluminum() {
  MaterialParams p;
  p.elasticity = elasticity_voigt(106.75e9, 60.41e9, 28.34e9);
  p.h_ab = coupling_matrix(p.q);
  return p;
}

MaterialState MaterialState::initial(const MaterialParams& p) {
  MaterialState s;
  s.xi.setConstant(p.xi0);
  return s;
}

double power_law(double tau, double xi, double n) {
  const double r = std::abs(tau) / xi;
  if (r > kTauRatioCap) {
    throw SolverError("flow overflow: |tau/xi| = " + std::to_string(r) +
                          " exceeds cap " + std::to_string(kTauRatioCap) +
                          "; reduce dt",
                      r);
  }
  if (r == 0.0) return 0.0;
  const double p = std::exp(n * std::log(r));
  return tau > 0.0 ? p : -p;
}

Vec12 resolved_tau(const Vec6& elastic_strain, const SlipSystems& systems) {
  Vec12 tau;
  for (int a = 0; a < kSlipCount; ++a) {
    tau[a] = systems[a].P.dot(elastic_strain);
  }
  return tau;
}

FlowEval flow_residual_jacobian(const Vec6& eps, const Vec6& eps_p_new,
                                const Vec6& eps_p_old, const Vec12& xi,
                                double dt, const MaterialParams& params,
                                const SlipSystems& systems) {
  const Vec6 elastic = eps - eps_p_new;
  FlowEval out;
  out.residual = eps_p_new - eps_p_old;
  for (int a = 0; a < kSlipCount; ++a) {
    const double tau = systems[a].P.dot(elastic);
    const double dg = dt * params.gamma_dot_0 * power_law(tau, xi[a], params.n);
    out.dgamma[a] = dg;
    out.residual -= systems[a].M * dg;

    const double r = std::abs(tau) / xi[a];
    if (r > 0.0) {
      const double slope = params.n / xi[a] * std::exp((params.n - 1.0) * std::log(r));
      out.jacobian +=
          dt * params.gamma_dot_0 * slope * (systems[a].M * systems[a].P.transpose());
    }
  }
  return out;
}

FlowSolution solve_flow(const Vec6& eps, const Vec6& eps_p_old,
                        const Vec12& xi, double dt,
                        const MaterialParams& params,
                        const SlipSystems& systems, double tol, int max_iter) {
  if (tol <= 0.0) throw SolverError("solve_flow: tol must be positive");

  FlowSolution sol;
  sol.eps_p = eps_p_old;
  FlowEval ev = flow_residual_jacobian(eps, sol.eps_p, eps_p_old, xi, dt,
                                       params, systems);
  const double scale = std::max(1.0, eps_p_old.norm() + ev.residual.norm());

  for (int iter = 0; iter <= max_iter; ++iter) {
    if (ev.residual.norm() <= tol * scale) {
      sol.dgamma = ev.dgamma;
      sol.iterations = iter;
      return sol;
    }
    Eigen::FullPivLU<Mat6> lu(ev.jacobian);
    if (!lu.isInvertible()) {
      throw SolverError("solve_flow: singular flow Jacobian",
                        ev.residual.norm());
    }
    sol.eps_p += lu.solve(-ev.residual);
    ev = flow_residual_jacobian(eps, sol.eps_p, eps_p_old, xi, dt, params,
                                systems);
  }
  throw SolverError("solve_flow: no convergence in " +
                        std::to_string(max_iter) + " iterations",
                    ev.residual.norm());
}

Vec12 solve_hardening(const Vec12& xi_old, const Vec12& dgamma,
                      const MaterialParams& params) {
  const Vec12 abs_dg = dgamma.cwiseAbs();
  Mat12 A = Mat12::Identity();
  for (int g = 0; g < kSlipCount; ++g) {
    A.col(g) += params.h0 * abs_dg[g] / params.xi_inf * params.h_ab.col(g);
  }
  const Vec12 rhs = xi_old + params.h0 * (params.h_ab * abs_dg);

  Eigen::FullPivLU<Mat12> lu(A);
  if (!lu.isInvertible()) {
    throw SolverError("solve_hardening: singular hardening system");
  }
  return lu.solve(rhs);
}

PredictorResult hardening_predictor(const Vec12& xi_old,
                                    const Vec12& tau_trial,
                                    const SlipSystems& systems,
                                    const MaterialParams& params) {
  PredictorResult out;

  std::vector<int> active;
  for (int a = 0; a < kSlipCount; ++a) {
    if (std::abs(tau_trial[a]) >= xi_old[a]) active.push_back(a);
  }

  Mat12 T;
  for (int a = 0; a < kSlipCount; ++a) {
    for (int b = 0; b < kSlipCount; ++b) {
      T(a, b) = params.h0 * params.h_ab(a, b) * (1.0 - xi_old[b] / params.xi_inf);
    }
  }

  for (int pass = 0; pass < kSlipCount && !active.empty(); ++pass) {
    const int m = static_cast<int>(active.size());
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
      const int a = active[i];
      const double sa = tau_trial[a] > 0.0 ? 1.0 : -1.0;
      rhs[i] = tau_trial[a] - sa * xi_old[a];
      for (int j = 0; j < m; ++j) {
        const int b = active[j];
        const double sb = tau_trial[b] > 0.0 ? 1.0 : -1.0;
        A(i, j) = sa * T(a, b) * sb + systems[a].P.dot(systems[b].M);
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) {
      out.dgamma.setZero();
      out.ok = false;
      return out;
    }
    const Eigen::VectorXd dg = lu.solve(rhs);

    std::vector<int> kept;
    out.dgamma.setZero();
    for (int i = 0; i < m; ++i) {
      if (tau_trial[active[i]] * dg[i] < 0.0) continue;
      kept.push_back(active[i]);
      out.dgamma[active[i]] = dg[i];
    }
    if (static_cast<int>(kept.size()) == m) return out;
    active = std::move(kept);
    out.dgamma.setZero();
  }
  return out;
}

StressResult stress_and_tangent(const Vec6& eps, const Vec6& eps_p,
                                const Vec12& xi, double dt,
                                const MaterialParams& params,
                                const SlipSystems& systems,
                                const StrainState& strain_state) {
  StressResult out;
  out.sigma = params.elasticity.C * (eps - eps_p);
  out.S = conjugate_stress(out.sigma, strain_state);

  // Consistent reduction: eps_p(eps) solves the flow residual, so
  // d eps_p/d eps = I - J^-1 and d sigma/d eps = C J^-1.
  const FlowEval ev =
      flow_residual_jacobian(eps, eps_p, eps_p, xi, dt, params, systems);
  Eigen::FullPivLU<Mat6> lu(ev.jacobian);
  if (!lu.isInvertible()) {
    throw SolverError("stress_and_tangent: singular flow Jacobian");
  }
  out.dsigma_deps = params.elasticity.C * lu.inverse();
  out.tangent = tangent_transform(out.dsigma_deps, out.sigma, strain_state.E);
  return out;
}

}  // namespace crystal
