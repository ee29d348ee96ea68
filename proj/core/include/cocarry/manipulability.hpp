#pragma once

#include "cocarry/types.hpp"

namespace cocarry {

/// Force manipulability ellipsoid M^F = (J J^T)^-1, eigen-sorted descending.
struct ForceEllipsoid {
  Mat3 m_f;
  Vec3 eigenvalues;   // lambda1 >= lambda2 >= lambda3 > 0
  Mat3 eigenvectors;  // columns, orthonormal, matching eigenvalue order
};

enum class CapacityFormula {
  // Ellipsoid radius along the load direction, 1/sqrt(d^T J J^T d).
  Radius,
  // Projection of the major semi-axis onto the load direction,
  // sqrt(lambda_max) * |v_max . d|. Kept for comparison.
  MajorAxisProjection,
};

/// Computes (J J^T + sigma I)^-1 with sigma = 1e-10 * trace(J J^T)/3.
/// Throws DegenerateJacobian when the regularized matrix still has a
/// condition number above 1e12.
ForceEllipsoid force_ellipsoid(const ArmJacobian& j);

/// Largest force magnitude achievable along unit direction d with unit-norm
/// joint torque. Invariant to the sign of d.
double force_capacity_along(const ArmJacobian& j, const Vec3& d,
                            CapacityFormula formula = CapacityFormula::Radius);
double force_capacity_along(const ForceEllipsoid& e, const Vec3& d,
                            CapacityFormula formula = CapacityFormula::Radius);

/// Velocity component achievable along d with unit-norm joint velocity,
/// sqrt(d^T J J^T d). Dual to the force radius: their product is 1.
double velocity_capacity_along(const ArmJacobian& j, const Vec3& d);

}  // namespace cocarry
