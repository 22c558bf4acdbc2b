#pragma once

#include <array>
#include <vector>

#include "crystal/stagger.hpp"
#include "crystal/types.hpp"

namespace crystal {

/// 8-node hexahedron with 12 enhanced-strain modes condensed at element
/// level. alpha = 0 reproduces the pure displacement element.
struct Hex8EAS {
  std::array<int, 8> nodes{};
  Vec12 alpha = Vec12::Zero();
  std::array<MaterialState, 8> gp_states{};  // 2x2x2 rule
  Mat3 Jbar = Mat3::Identity();              // centroidal Jacobian
  double Jbar_det = 1.0;
};

/// Prescription of one displacement component or nodal force.
struct Constraint {
  int node = 0;
  int dof = 0;        // 0..2
  double value = 0.0; // displacement [m], rate [m/s], or force [N]
};

struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<Hex8EAS> elements;
  std::vector<Constraint> fixed;   // dof held at value
  std::vector<Constraint> moving;  // dof moves at rate * t
  std::vector<Constraint> loads;   // constant nodal force
  Eigen::VectorXd u;               // current displacement state

  int dof_count() const { return 3 * static_cast<int>(nodes.size()); }
};

/// Regular nx x ny x nz block of hexahedra on [0,Lx] x [0,Ly] x [0,Lz],
/// no constraints. States are left at their default.
Mesh make_block_mesh(int nx, int ny, int nz, double Lx, double Ly, double Lz);

/// Computes centroidal Jacobians and initializes all point states.
/// Throws on non-positive element volumes. Call once after building.
void prepare_mesh(Mesh& mesh, const MaterialParams& params);

/// Total Green-Lagrange strain E = E_u + E_alpha at a parent point,
/// |xi_parent| <= 1 componentwise.
Vec6 element_strain(const Mesh& mesh, const Hex8EAS& el,
                    const Eigen::VectorXd& u, const Vec3& xi_parent);

/// Integrated element quantities with the enhancement block statically
/// condensed. K_aa and K_au are kept for the alpha recovery after the
/// global solve; trial_states hold the per-point constitutive solution
/// pending commit.
struct ElementSystem {
  Eigen::Matrix<double, 24, 24> K = Eigen::Matrix<double, 24, 24>::Zero();
  Eigen::Matrix<double, 24, 1> f = Eigen::Matrix<double, 24, 1>::Zero();
  Eigen::Matrix<double, 12, 24> K_au = Eigen::Matrix<double, 12, 24>::Zero();
  Eigen::Matrix<double, 12, 12> K_aa = Eigen::Matrix<double, 12, 12>::Zero();
  Eigen::Matrix<double, 12, 1> f_a = Eigen::Matrix<double, 12, 1>::Zero();
  std::array<MaterialState, 8> trial_states{};
  int substeps = 0;  // relaxation substeps summed over the 8 points
};

ElementSystem element_force_stiffness(const Mesh& mesh, int element_id,
                                      const Eigen::VectorXd& u, double dt,
                                      const MaterialParams& params,
                                      const SlipSystems& systems,
                                      const RelaxationConfig& cfg);

/// Condensation recovery: alpha increment following a global update du.
Vec12 recover_alpha(const ElementSystem& es,
                    const Eigen::Matrix<double, 24, 1>& du);

struct FemConfig {
  double newton_tol = 1e-8;
  int newton_max_iter = 25;
  int max_bisections = 4;
  RelaxationConfig stagger;
};

struct StepRecord {
  double time = 0.0;
  int newton_iterations = 0;
  Eigen::VectorXd u;         // converged displacement
  Eigen::VectorXd reaction;  // f_int - f_ext at convergence
};

struct FemHistory {
  std::vector<StepRecord> steps;
};

/// Displacement-controlled marching: per step, prescribed dofs jump to
/// their scheduled values and Newton iterates the condensed system until
/// ||r_free|| <= tol (||f_ext|| + ||reaction||). A diverged step is
/// bisected in time (up to max_bisections) before failing. Converged
/// material states and alpha are committed per step.
FemHistory solve_displacement_control(Mesh& mesh, double dt, int steps,
                                      const MaterialParams& params,
                                      const SlipSystems& systems,
                                      const FemConfig& cfg, double t0 = 0.0);

struct PatchTestReport {
  double max_strain_dev_rel = 0.0;
  double max_stress_dev_rel = 0.0;
  double max_alpha = 0.0;
};

/// 2x2x2-element unit cube with the interior node moved by `distortion`
/// in the reference configuration and a linear displacement field applied
/// on the boundary. Reports worst-case deviations of E and S from the
/// homogeneous exact values, and max |alpha|.
PatchTestReport patch_test(double distortion,
                           const MaterialParams& params);

}  // namespace crystal
