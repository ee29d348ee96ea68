#include "cocarry/manipulability.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

// Regularized J J^T. Postures near full elbow extension make the raw
// product ill-conditioned; downstream optimization must never see NaNs.
Mat3 regularized_gram(const ArmJacobian& j) {
  Mat3 g = j * j.transpose();
  const double sigma = 1e-10 * g.trace() / 3.0;
  g += sigma * Mat3::Identity();
  return g;
}

}  // namespace

ForceEllipsoid force_ellipsoid(const ArmJacobian& j) {
  if (!j.allFinite()) throw DegenerateJacobian("Jacobian contains non-finite entries");
  const Mat3 g = regularized_gram(j);

  Eigen::SelfAdjointEigenSolver<Mat3> es(g);
  const Vec3 g_eig = es.eigenvalues();  // ascending
  if (g_eig[0] <= 0.0 || g_eig[2] / g_eig[0] > 1e12)
    throw DegenerateJacobian("J J^T condition number above 1e12");

  ForceEllipsoid e;
  e.m_f = es.eigenvectors() * g_eig.cwiseInverse().asDiagonal() *
          es.eigenvectors().transpose();
  // Eigenvalues of M^F are the reciprocals of those of J J^T; reversing the
  // ascending order of g_eig yields the descending order for M^F.
  for (int i = 0; i < 3; ++i) {
    e.eigenvalues[i] = 1.0 / g_eig[i];
    e.eigenvectors.col(i) = es.eigenvectors().col(i);
  }
  return e;
}

double force_capacity_along(const ArmJacobian& j, const Vec3& d,
                            CapacityFormula formula) {
  if (formula == CapacityFormula::Radius) {
    const Mat3 g = regularized_gram(j);
    return 1.0 / std::sqrt(d.dot(g * d));
  }
  return force_capacity_along(force_ellipsoid(j), d, formula);
}

double force_capacity_along(const ForceEllipsoid& e, const Vec3& d,
                            CapacityFormula formula) {
  if (formula == CapacityFormula::MajorAxisProjection) {
    return std::sqrt(e.eigenvalues[0]) * std::abs(e.eigenvectors.col(0).dot(d));
  }
  // d^T (M^F)^-1 d reconstructed from the eigen-decomposition.
  double quad = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double proj = e.eigenvectors.col(i).dot(d);
    quad += proj * proj / e.eigenvalues[i];
  }
  return 1.0 / std::sqrt(quad);
}

double velocity_capacity_along(const ArmJacobian& j, const Vec3& d) {
  const Mat3 g = regularized_gram(j);
  return std::sqrt(d.dot(g * d));
}

}  // namespace cocarry
