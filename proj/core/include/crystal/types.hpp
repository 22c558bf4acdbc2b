#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace crystal {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

/// Number of dominant FCC slip systems.
inline constexpr int kSlipCount = 12;

/// A constitutive or global solve could not complete (non-convergence,
/// singular system, flow-law overflow). Carries the last residual where
/// one is meaningful.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Malformed run configuration or mesh file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crystal
