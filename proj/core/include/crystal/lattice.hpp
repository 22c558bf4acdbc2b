#pragma once

#include <array>

#include "crystal/types.hpp"

namespace crystal {

/// Crystal orientation in spherical coordinates.
struct Orientation {
  double theta = 0.0;  // rad
  double phi = 0.0;    // rad
};

/// Transformation matrix T(theta, phi). Orthogonal with det = +1; rows are
/// the rotated basis. The stereographic pole projection uses its transpose.
Mat3 rotation_matrix(const Orientation& o);

/// One slip system: unit plane normal, unit slip direction, and the
/// derived Schmid and projection vectors. All fields immutable once built.
struct SlipSystem {
  Vec3 m = Vec3::Zero();   // unit slip-plane normal
  Vec3 n = Vec3::Zero();   // unit slip direction, m.n = 0
  Vec6 M = Vec6::Zero();   // Schmid tensor sym(m x n), strain-style Voigt
  Vec6 P = Vec6::Zero();   // M : C, stress-style Voigt [Pa]
};

using SlipSystems = std::array<SlipSystem, kSlipCount>;

/// Cubic lattice elasticity in Voigt form (strain-style in, stress out).
struct ElasticityVoigt {
  Mat6 C = Mat6::Zero();
};

/// Assembles the cubic 6x6 elasticity matrix from C11, C12, C44 [Pa].
/// Rejects parameter sets that are not positive definite.
ElasticityVoigt elasticity_voigt(double c11, double c12, double c44);

/// The 12 dominant {111}<110> systems of an FCC crystal, in crystal axes
/// and conventional table order. m is normalized by 1/sqrt(3), n by
/// 1/sqrt(2). P is left zero here; it is frame- and elasticity-dependent
/// and filled in by rotate_and_project.
SlipSystems fcc_slip_systems();

/// Rotates plane normals and slip directions into the sample frame,
/// recomputes the Schmid tensors, and projects them through the
/// elasticity: P = M : C.
SlipSystems rotate_and_project(const SlipSystems& systems,
                               const Orientation& o,
                               const ElasticityVoigt& elasticity);

}  // namespace crystal
