#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "cocarry/errors.hpp"
#include "cocarry/manipulability.hpp"
#include "cocarry/skeleton.hpp"
#include "helpers.hpp"

using namespace cocarry;
using testutil::random_in_limits;

namespace {

ArmJacobian random_full_rank_jacobian(Rng& rng) {
  while (true) {
    ArmJacobian J;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) J(r, c) = rng.uniform(-1.0, 1.0);
    Eigen::JacobiSVD<ArmJacobian> svd(J);
    if (svd.singularValues().minCoeff() > 0.2) return J;
  }
}

Vec3 random_unit(Rng& rng) {
  while (true) {
    Vec3 d(rng.normal(), rng.normal(), rng.normal());
    if (d.norm() > 1e-3) return d.normalized();
  }
}

// Independent oracle: bisection on the largest alpha with ||J^T (alpha d)|| <= 1.
double brute_force_radius(const ArmJacobian& J, const Vec3& d) {
  const auto feasible = [&](double alpha) { return (J.transpose() * (alpha * d)).norm() <= 1.0; };
  double lo = 0.0, hi = 1.0;
  while (feasible(hi)) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_CASE("diagonal gram matrix inverts entrywise") {
  ArmJacobian J = ArmJacobian::Zero();
  J(0, 0) = 2.0;
  J(1, 1) = 1.0;
  J(2, 2) = 0.5;
  const ForceEllipsoid e = force_ellipsoid(J);
  CHECK(e.m_f(0, 0) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(e.m_f(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(e.m_f(2, 2) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(e.eigenvalues[0] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(std::abs(e.eigenvectors.col(0).dot(Vec3::UnitZ())) == doctest::Approx(1.0));
}

TEST_CASE("orthonormal rows give the unit sphere") {
  ArmJacobian J = ArmJacobian::Zero();
  J.leftCols<3>() = Mat3::Identity();
  const ForceEllipsoid e = force_ellipsoid(J);
  CHECK((e.m_f - Mat3::Identity()).norm() < 1e-6);
  Rng rng(31);
  for (int n = 0; n < 10; ++n)
    CHECK(force_capacity_along(e, random_unit(rng)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("diagonal ellipsoid radius along z") {
  ArmJacobian J = ArmJacobian::Zero();
  J(0, 0) = 2.0;
  J(1, 1) = 1.0;
  J(2, 2) = 0.5;
  const ForceEllipsoid e = force_ellipsoid(J);
  CHECK(force_capacity_along(e, Vec3::UnitZ()) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("force radius matches the unit-torque bisection oracle") {
  Rng rng(32);
  for (int n = 0; n < 100; ++n) {
    const ArmJacobian J = random_full_rank_jacobian(rng);
    const Vec3 d = random_unit(rng);
    const double radius = force_capacity_along(J, d);
    CHECK(radius == doctest::Approx(brute_force_radius(J, d)).epsilon(1e-3));
  }
}

TEST_CASE("force and velocity radii are dual") {
  BodyGeometry geom;
  Rng rng(33);
  for (int n = 0; n < 100; ++n) {
    const ArmState state{random_in_limits(rng, 0.2), Side::Right};
    const ArmJacobian J = position_jacobian(state, geom);
    const Vec3 d = random_unit(rng);
    const double product = force_capacity_along(J, d) * velocity_capacity_along(J, d);
    CHECK(std::abs(product - 1.0) < 1e-9);
  }
}

TEST_CASE("capacity is invariant to the sign of the direction") {
  Rng rng(34);
  const ArmJacobian J = random_full_rank_jacobian(rng);
  const Vec3 d = random_unit(rng);
  CHECK(force_capacity_along(J, d) == doctest::Approx(force_capacity_along(J, -d)));
  CHECK(force_capacity_along(J, d, CapacityFormula::MajorAxisProjection) ==
        doctest::Approx(force_capacity_along(J, -d, CapacityFormula::MajorAxisProjection)));
}

TEST_CASE("rotation equivariance of the ellipsoid") {
  Rng rng(35);
  const ArmJacobian J = random_full_rank_jacobian(rng);
  const Mat3 R =
      Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const ForceEllipsoid e1 = force_ellipsoid(J);
  const ForceEllipsoid e2 = force_ellipsoid(R * J);
  CHECK((e1.eigenvalues - e2.eigenvalues).norm() < 1e-9);
  CHECK((e2.m_f - R * e1.m_f * R.transpose()).norm() < 1e-9);
}

TEST_CASE("major axis projection reduces to the radius along the major axis") {
  Rng rng(36);
  const ArmJacobian J = random_full_rank_jacobian(rng);
  const ForceEllipsoid e = force_ellipsoid(J);
  const Vec3 v_max = e.eigenvectors.col(0);
  CHECK(force_capacity_along(e, v_max, CapacityFormula::MajorAxisProjection) ==
        doctest::Approx(force_capacity_along(e, v_max)).epsilon(1e-6));
}

TEST_CASE("degenerate Jacobian is rejected") {
  CHECK_THROWS_AS(force_ellipsoid(ArmJacobian::Zero()), DegenerateJacobian);
  ArmJacobian J = ArmJacobian::Zero();
  J(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(force_ellipsoid(J), DegenerateJacobian);
}

TEST_CASE("rank-deficient Jacobian survives through regularization") {
  // The regularizer caps the Gram condition number, so a rank-one Jacobian
  // yields a valid ellipsoid with a vastly larger capacity transverse to the
  // actuated direction instead of NaNs.
  ArmJacobian J = ArmJacobian::Zero();
  J.row(0) << 1, 0, 0, 0;
  const ForceEllipsoid e = force_ellipsoid(J);
  CHECK(std::isfinite(e.eigenvalues[0]));
  CHECK(force_capacity_along(e, Vec3::UnitX()) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(force_capacity_along(e, Vec3::UnitZ()) > 1e4);
}
