#pragma once

#include <cmath>

#include "crystal/types.hpp"

namespace crystal {

// Voigt order is (11, 22, 33, 23, 13, 12) throughout. Strain-style
// vectors carry engineering (doubled) shears, stress-style vectors carry
// plain shears. With that split, every tensor contraction a:b used here
// is a plain dot product of a strain-style and a stress-style vector,
// and the cubic elasticity matrix maps strain-style to stress-style.

inline Vec6 strain_to_voigt(const Mat3& e) {
  Vec6 v;
  v << e(0, 0), e(1, 1), e(2, 2),
      e(1, 2) + e(2, 1), e(0, 2) + e(2, 0), e(0, 1) + e(1, 0);
  return v;
}

inline Vec6 stress_to_voigt(const Mat3& s) {
  Vec6 v;
  v << s(0, 0), s(1, 1), s(2, 2), s(1, 2), s(0, 2), s(0, 1);
  return v;
}

inline Mat3 voigt_to_strain(const Vec6& v) {
  Mat3 e;
  e << v[0], 0.5 * v[5], 0.5 * v[4],
      0.5 * v[5], v[1], 0.5 * v[3],
      0.5 * v[4], 0.5 * v[3], v[2];
  return e;
}

inline Mat3 voigt_to_stress(const Vec6& v) {
  Mat3 s;
  s << v[0], v[5], v[4],
      v[5], v[1], v[3],
      v[4], v[3], v[2];
  return s;
}

/// Frobenius norm of the tensor represented by a strain-style vector.
inline double strain_frobenius_norm(const Vec6& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] +
                   0.5 * (v[3] * v[3] + v[4] * v[4] + v[5] * v[5]));
}

}  // namespace crystal
