#include "crystal/fem.hpp"

#include <cmath>
#include <string>

#include "crystal/kinematics.hpp"
#include "crystal/voigt.hpp"

namespace crystal {

namespace {

constexpr double kGauss = 0.57735026918962576450914878050196;  // 1/sqrt(3)

// Parent coordinates of the 8 nodes.
constexpr double kNodeXi[8][3] = {
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};

using Grad8 = Eigen::Matrix<double, 8, 3>;

Grad8 shape_gradients_parent(const Vec3& xi) {
  Grad8 g;
  for (int a = 0; a < 8; ++a) {
    const double x1 = kNodeXi[a][0], x2 = kNodeXi[a][1], x3 = kNodeXi[a][2];
    g(a, 0) = 0.125 * x1 * (1.0 + x2 * xi[1]) * (1.0 + x3 * xi[2]);
    g(a, 1) = 0.125 * x2 * (1.0 + x1 * xi[0]) * (1.0 + x3 * xi[2]);
    g(a, 2) = 0.125 * x3 * (1.0 + x1 * xi[0]) * (1.0 + x2 * xi[1]);
  }
  return g;
}

Mat3 jacobian(const Mesh& mesh, const Hex8EAS& el, const Grad8& dN_dxi) {
  Mat3 J = Mat3::Zero();
  for (int a = 0; a < 8; ++a) {
    J += mesh.nodes[el.nodes[a]] * dN_dxi.row(a);  // dX_I/dxi_j
  }
  return J;
}

struct GpGeometry {
  Grad8 dN_dX;
  double detJ = 0.0;
  Mat3 grad_u = Mat3::Zero();
  Mat3 F = Mat3::Identity();
};

GpGeometry gp_geometry(const Mesh& mesh, const Hex8EAS& el,
                       const Eigen::VectorXd& u, const Vec3& xi) {
  const Grad8 dN_dxi = shape_gradients_parent(xi);
  const Mat3 J = jacobian(mesh, el, dN_dxi);
  GpGeometry g;
  g.detJ = J.determinant();
  if (g.detJ <= 0.0) {
    throw SolverError("hex8: non-positive Jacobian determinant");
  }
  const Mat3 J_inv_T = J.inverse().transpose();
  for (int a = 0; a < 8; ++a) {
    g.dN_dX.row(a) = (J_inv_T * dN_dxi.row(a).transpose()).transpose();
  }
  for (int a = 0; a < 8; ++a) {
    const int n = el.nodes[a];
    const Vec3 ua(u[3 * n], u[3 * n + 1], u[3 * n + 2]);
    g.grad_u += ua * g.dN_dX.row(a);  // du_i/dX_J
  }
  g.F = Mat3::Identity() + g.grad_u;
  return g;
}

// Enhanced modes in parent coordinates: tensor of column j at unit alpha_j.
// Twelve internal modes: each normal strain is enriched along its own
// coordinate (the part the trilinear interpolation cannot represent) and
// each shear row carries both bending-relief linears plus its own
// bilinear. Every mode has zero parent-cube integral (patch test) and
// none lies in the compatible strain span, so the condensed element keeps
// exactly the six rigid zero-energy modes.
//   col  0: E11 ~ x1      col  1: E22 ~ x2      col  2: E33 ~ x3
//   cols 3-5:  E23 ~ x2, x3, x2 x3
//   cols 6-8:  E13 ~ x1, x3, x1 x3
//   cols 9-11: E12 ~ x1, x2, x1 x2
Mat3 enhanced_mode_tensor(int j, const Vec3& xi) {
  Mat3 t = Mat3::Zero();
  switch (j) {
    case 0: t(0, 0) = xi[0]; break;
    case 1: t(1, 1) = xi[1]; break;
    case 2: t(2, 2) = xi[2]; break;
    case 3: t(1, 2) = t(2, 1) = 0.5 * xi[1]; break;
    case 4: t(1, 2) = t(2, 1) = 0.5 * xi[2]; break;
    case 5: t(1, 2) = t(2, 1) = 0.5 * xi[1] * xi[2]; break;
    case 6: t(0, 2) = t(2, 0) = 0.5 * xi[0]; break;
    case 7: t(0, 2) = t(2, 0) = 0.5 * xi[2]; break;
    case 8: t(0, 2) = t(2, 0) = 0.5 * xi[0] * xi[2]; break;
    case 9: t(0, 1) = t(1, 0) = 0.5 * xi[0]; break;
    case 10: t(0, 1) = t(1, 0) = 0.5 * xi[1]; break;
    case 11: t(0, 1) = t(1, 0) = 0.5 * xi[0] * xi[1]; break;
  }
  return t;
}

// B_alpha: Voigt columns of the pushed enhanced modes,
// E_alpha = (Jbar_det / detJ) Jbar^-T Etilde Jbar^-1.
Eigen::Matrix<double, 6, 12> enhanced_B(const Hex8EAS& el, const Vec3& xi,
                                        double detJ) {
  const Mat3 Jbar_inv = el.Jbar.inverse();
  const double scale = el.Jbar_det / detJ;
  Eigen::Matrix<double, 6, 12> B;
  for (int j = 0; j < 12; ++j) {
    const Mat3 pushed =
        scale * Jbar_inv.transpose() * enhanced_mode_tensor(j, xi) * Jbar_inv;
    B.col(j) = strain_to_voigt(pushed);
  }
  return B;
}

Vec6 displacement_strain(const GpGeometry& g) {
  const Mat3 gu = g.grad_u;
  const Mat3 E =
      0.5 * (gu + gu.transpose() + gu.transpose() * gu);
  return strain_to_voigt(E);
}

Eigen::Matrix<double, 6, 24> displacement_B(const GpGeometry& g) {
  Eigen::Matrix<double, 6, 24> B = Eigen::Matrix<double, 6, 24>::Zero();
  const Mat3& F = g.F;
  for (int a = 0; a < 8; ++a) {
    for (int i = 0; i < 3; ++i) {
      const int c = 3 * a + i;
      B(0, c) = F(i, 0) * g.dN_dX(a, 0);
      B(1, c) = F(i, 1) * g.dN_dX(a, 1);
      B(2, c) = F(i, 2) * g.dN_dX(a, 2);
      B(3, c) = F(i, 1) * g.dN_dX(a, 2) + F(i, 2) * g.dN_dX(a, 1);
      B(4, c) = F(i, 0) * g.dN_dX(a, 2) + F(i, 2) * g.dN_dX(a, 0);
      B(5, c) = F(i, 0) * g.dN_dX(a, 1) + F(i, 1) * g.dN_dX(a, 0);
    }
  }
  return B;
}

Vec3 gauss_point(int gp) {
  return Vec3(gp & 1 ? kGauss : -kGauss, gp & 2 ? kGauss : -kGauss,
              gp & 4 ? kGauss : -kGauss);
}

}  // namespace

Mesh make_block_mesh(int nx, int ny, int nz, double Lx, double Ly,
                     double Lz) {
  Mesh mesh;
  const auto node_id = [&](int i, int j, int k) {
    return i + (nx + 1) * (j + (ny + 1) * k);
  };
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        mesh.nodes.emplace_back(Lx * i / nx, Ly * j / ny, Lz * k / nz);
      }
    }
  }
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        Hex8EAS el;
        el.nodes = {node_id(i, j, k),         node_id(i + 1, j, k),
                    node_id(i + 1, j + 1, k), node_id(i, j + 1, k),
                    node_id(i, j, k + 1),     node_id(i + 1, j, k + 1),
                    node_id(i + 1, j + 1, k + 1), node_id(i, j + 1, k + 1)};
        mesh.elements.push_back(el);
      }
    }
  }
  return mesh;
}

void prepare_mesh(Mesh& mesh, const MaterialParams& params) {
  mesh.u = Eigen::VectorXd::Zero(mesh.dof_count());
  for (auto& el : mesh.elements) {
    const Grad8 dN_dxi = shape_gradients_parent(Vec3::Zero());
    el.Jbar = jacobian(mesh, el, dN_dxi);
    el.Jbar_det = el.Jbar.determinant();
    if (el.Jbar_det <= 0.0) {
      throw SolverError("prepare_mesh: non-positive centroidal Jacobian");
    }
    el.alpha.setZero();
    el.gp_states.fill(MaterialState::initial(params));
  }
}

Vec6 element_strain(const Mesh& mesh, const Hex8EAS& el,
                    const Eigen::VectorXd& u, const Vec3& xi_parent) {
  const GpGeometry g = gp_geometry(mesh, el, u, xi_parent);
  return displacement_strain(g) +
         enhanced_B(el, xi_parent, g.detJ) * el.alpha;
}

ElementSystem element_force_stiffness(const Mesh& mesh, int element_id,
                                      const Eigen::VectorXd& u, double dt,
                                      const MaterialParams& params,
                                      const SlipSystems& systems,
                                      const RelaxationConfig& cfg) {
  const Hex8EAS& el = mesh.elements[element_id];
  ElementSystem es;
  Eigen::Matrix<double, 24, 12> K_ua = Eigen::Matrix<double, 24, 12>::Zero();
  Eigen::Matrix<double, 24, 24> K_uu = Eigen::Matrix<double, 24, 24>::Zero();
  Eigen::Matrix<double, 24, 1> f_u = Eigen::Matrix<double, 24, 1>::Zero();

  // Centroidal deformation gradient drives the multiplicative F_p update.
  const Mat3 F_centroid = gp_geometry(mesh, el, u, Vec3::Zero()).F;

  for (int gp = 0; gp < 8; ++gp) {
    const Vec3 xi = gauss_point(gp);
    const GpGeometry g = gp_geometry(mesh, el, u, xi);
    const Eigen::Matrix<double, 6, 24> Bu = displacement_B(g);
    const Eigen::Matrix<double, 6, 12> Ba = enhanced_B(el, xi, g.detJ);
    const Vec6 E = displacement_strain(g) + Ba * el.alpha;

    StrainState ss;
    StepResult step;
    StressResult sr;
    try {
      ss = pade_hencky(E);
      step = relax_integrate(ss.eps, el.gp_states[gp], dt, params, systems,
                             cfg, F_centroid);
      sr = stress_and_tangent(ss.eps, step.state.eps_p, step.state.xi, dt,
                              params, systems, ss);
    } catch (const SolverError& err) {
      throw SolverError("element " + std::to_string(element_id) + " gp " +
                            std::to_string(gp) + ": " + err.what(),
                        err.residual());
    }
    es.trial_states[gp] = step.state;
    es.substeps += step.trace.substeps;
    const double w = g.detJ;  // unit Gauss weights

    f_u += w * Bu.transpose() * sr.S;
    es.f_a += w * Ba.transpose() * sr.S;
    K_uu += w * Bu.transpose() * sr.tangent * Bu;
    K_ua += w * Bu.transpose() * sr.tangent * Ba;
    es.K_au += w * Ba.transpose() * sr.tangent * Bu;
    es.K_aa += w * Ba.transpose() * sr.tangent * Ba;

    // Geometric part: initial-stress stiffness on the displacement block.
    const Mat3 S_hat = voigt_to_stress(sr.S);
    for (int a = 0; a < 8; ++a) {
      const Vec3 ga = g.dN_dX.row(a).transpose();
      for (int b = 0; b < 8; ++b) {
        const Vec3 gb = g.dN_dX.row(b).transpose();
        const double gab = w * ga.dot(S_hat * gb);
        for (int i = 0; i < 3; ++i) K_uu(3 * a + i, 3 * b + i) += gab;
      }
    }
  }

  Eigen::FullPivLU<Eigen::Matrix<double, 12, 12>> lu(es.K_aa);
  if (!lu.isInvertible()) {
    throw SolverError("element " + std::to_string(element_id) +
                      ": singular enhancement block (distorted element?)");
  }
  es.K = K_uu - K_ua * lu.solve(es.K_au);
  es.f = f_u - K_ua * lu.solve(es.f_a);
  return es;
}

Vec12 recover_alpha(const ElementSystem& es,
                    const Eigen::Matrix<double, 24, 1>& du) {
  return -es.K_aa.fullPivLu().solve(es.f_a + es.K_au * du);
}

namespace {

struct NewtonOutcome {
  Eigen::VectorXd reaction;
  int iterations = 0;
};

void set_prescribed(const Mesh& mesh, double t, Eigen::VectorXd& u) {
  for (const auto& c : mesh.fixed) u[3 * c.node + c.dof] = c.value;
  for (const auto& c : mesh.moving) u[3 * c.node + c.dof] = c.value * t;
}

NewtonOutcome newton_solve(Mesh& mesh, double t, double dt,
                           Eigen::VectorXd& u, const MaterialParams& params,
                           const SlipSystems& systems, const FemConfig& cfg) {
  const int ndof = mesh.dof_count();
  const int nel = static_cast<int>(mesh.elements.size());

  std::vector<bool> prescribed(ndof, false);
  for (const auto& c : mesh.fixed) prescribed[3 * c.node + c.dof] = true;
  for (const auto& c : mesh.moving) prescribed[3 * c.node + c.dof] = true;
  std::vector<int> free_dofs;
  for (int d = 0; d < ndof; ++d) {
    if (!prescribed[d]) free_dofs.push_back(d);
  }
  const int nfree = static_cast<int>(free_dofs.size());

  Eigen::VectorXd f_ext = Eigen::VectorXd::Zero(ndof);
  for (const auto& c : mesh.loads) f_ext[3 * c.node + c.dof] += c.value;

  set_prescribed(mesh, t, u);

  std::vector<ElementSystem> systems_el(nel);
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    Eigen::VectorXd f_int = Eigen::VectorXd::Zero(ndof);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(ndof, ndof);
    for (int e = 0; e < nel; ++e) {
      systems_el[e] =
          element_force_stiffness(mesh, e, u, dt, params, systems,
                                  cfg.stagger);
      const auto& es = systems_el[e];
      const auto& nodes = mesh.elements[e].nodes;
      for (int a = 0; a < 8; ++a) {
        for (int i = 0; i < 3; ++i) {
          const int ga = 3 * nodes[a] + i;
          f_int[ga] += es.f(3 * a + i);
          for (int b = 0; b < 8; ++b) {
            for (int j = 0; j < 3; ++j) {
              K(ga, 3 * nodes[b] + j) += es.K(3 * a + i, 3 * b + j);
            }
          }
        }
      }
    }

    const Eigen::VectorXd r = f_ext - f_int;
    double r_free_norm = 0.0;
    double reaction_norm = 0.0;
    for (int d = 0; d < ndof; ++d) {
      if (prescribed[d]) {
        reaction_norm += r[d] * r[d];
      } else {
        r_free_norm += r[d] * r[d];
      }
    }
    r_free_norm = std::sqrt(r_free_norm);
    reaction_norm = std::sqrt(reaction_norm);

    const double f_ref =
        std::max(f_ext.norm() + reaction_norm, 1e-9);
    if (r_free_norm <= cfg.newton_tol * f_ref) {
      for (int e = 0; e < nel; ++e) {
        mesh.elements[e].gp_states = systems_el[e].trial_states;
      }
      NewtonOutcome out;
      out.reaction = f_int - f_ext;
      out.iterations = it;
      return out;
    }

    Eigen::MatrixXd K_ff(nfree, nfree);
    Eigen::VectorXd r_f(nfree);
    for (int p = 0; p < nfree; ++p) {
      r_f[p] = r[free_dofs[p]];
      for (int q = 0; q < nfree; ++q) {
        K_ff(p, q) = K(free_dofs[p], free_dofs[q]);
      }
    }
    const Eigen::VectorXd du_f = K_ff.partialPivLu().solve(r_f);
    if (!du_f.allFinite()) {
      throw SolverError("newton_solve: singular global system");
    }

    Eigen::VectorXd du = Eigen::VectorXd::Zero(ndof);
    for (int p = 0; p < nfree; ++p) du[free_dofs[p]] = du_f[p];
    u += du;

    for (int e = 0; e < nel; ++e) {
      Eigen::Matrix<double, 24, 1> du_el;
      const auto& nodes = mesh.elements[e].nodes;
      for (int a = 0; a < 8; ++a) {
        for (int i = 0; i < 3; ++i) du_el(3 * a + i) = du[3 * nodes[a] + i];
      }
      mesh.elements[e].alpha += recover_alpha(systems_el[e], du_el);
    }
  }
  throw SolverError("newton_solve: no convergence in " +
                    std::to_string(cfg.newton_max_iter) + " iterations");
}

void advance(Mesh& mesh, double t0, double h, int depth, Eigen::VectorXd& u,
             const MaterialParams& params, const SlipSystems& slip,
             const FemConfig& cfg, StepRecord* record) {
  const Eigen::VectorXd u_entry = u;
  std::vector<Vec12> alpha_entry;
  alpha_entry.reserve(mesh.elements.size());
  for (const auto& el : mesh.elements) alpha_entry.push_back(el.alpha);

  try {
    const NewtonOutcome out = newton_solve(mesh, t0 + h, h, u, params, slip, cfg);
    if (record) {
      record->time = t0 + h;
      record->newton_iterations = out.iterations;
      record->u = u;
      record->reaction = out.reaction;
    }
    return;
  } catch (const SolverError&) {
    if (depth >= cfg.max_bisections) throw;
    u = u_entry;
    for (size_t e = 0; e < mesh.elements.size(); ++e) {
      mesh.elements[e].alpha = alpha_entry[e];
    }
  }
  advance(mesh, t0, 0.5 * h, depth + 1, u, params, slip, cfg, nullptr);
  advance(mesh, t0 + 0.5 * h, 0.5 * h, depth + 1, u, params, slip, cfg,
          record);
}

}  // namespace

FemHistory solve_displacement_control(Mesh& mesh, double dt, int steps,
                                      const MaterialParams& params,
                                      const SlipSystems& systems,
                                      const FemConfig& cfg, double t0) {
  if (mesh.u.size() != mesh.dof_count()) {
    mesh.u = Eigen::VectorXd::Zero(mesh.dof_count());
  }
  FemHistory history;
  for (int s = 0; s < steps; ++s) {
    StepRecord record;
    advance(mesh, t0 + s * dt, dt, 0, mesh.u, params, systems, cfg, &record);
    history.steps.push_back(std::move(record));
  }
  return history;
}

PatchTestReport patch_test(double distortion, const MaterialParams& params) {
  Mesh mesh = make_block_mesh(2, 2, 2, 1.0, 1.0, 1.0);

  // The single interior node sits at the cube center.
  int interior = -1;
  for (size_t i = 0; i < mesh.nodes.size(); ++i) {
    if ((mesh.nodes[i] - Vec3(0.5, 0.5, 0.5)).norm() < 1e-12) {
      interior = static_cast<int>(i);
    }
  }
  mesh.nodes[interior] += distortion * Vec3(0.36, -0.48, 0.8);

  Mat3 A;
  A << 0.9, 0.3, -0.2,
      0.1, -0.5, 0.4,
      -0.3, 0.2, 0.7;
  A *= 1e-4;

  for (int nd = 0; nd < static_cast<int>(mesh.nodes.size()); ++nd) {
    if (nd == interior) continue;
    const Vec3 ub = A * mesh.nodes[nd];
    for (int d = 0; d < 3; ++d) {
      mesh.fixed.push_back({nd, d, ub[d]});
    }
  }
  prepare_mesh(mesh, params);

  const SlipSystems slip = rotate_and_project(fcc_slip_systems(), {},
                                              params.elasticity);
  FemConfig cfg;
  cfg.newton_tol = 1e-13;  // the patch identity is checked at 1e-9
  const FemHistory history =
      solve_displacement_control(mesh, 1e-3, 1, params, slip, cfg);
  const Eigen::VectorXd& u = history.steps.back().u;

  const Mat3 E_exact_t = 0.5 * (A + A.transpose() + A.transpose() * A);
  const Vec6 E_exact = strain_to_voigt(E_exact_t);
  const StrainState ss_exact = pade_hencky(E_exact);
  const Vec6 sigma_exact = params.elasticity.C * ss_exact.eps;
  const Vec6 S_exact = conjugate_stress(sigma_exact, ss_exact);

  PatchTestReport report;
  for (const auto& el : mesh.elements) {
    report.max_alpha =
        std::max(report.max_alpha, el.alpha.cwiseAbs().maxCoeff());
    for (int gp = 0; gp < 8; ++gp) {
      const Vec6 E = element_strain(mesh, el, u, gauss_point(gp));
      const StrainState ss = pade_hencky(E);
      const Vec6 sigma =
          params.elasticity.C * (ss.eps - el.gp_states[gp].eps_p);
      const Vec6 S = conjugate_stress(sigma, ss);
      report.max_strain_dev_rel = std::max(
          report.max_strain_dev_rel, (E - E_exact).norm() / E_exact.norm());
      report.max_stress_dev_rel = std::max(
          report.max_stress_dev_rel, (S - S_exact).norm() / S_exact.norm());
    }
  }
  return report;
}

}  // namespace crystal
