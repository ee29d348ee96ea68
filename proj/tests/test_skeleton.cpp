#include <doctest.h>

#include <numbers>

#include "cocarry/skeleton.hpp"
#include "helpers.hpp"

using namespace cocarry;
using testutil::random_in_limits;

namespace {
constexpr double kPi = std::numbers::pi;

// Central finite-difference oracle for the wrist Jacobian.
ArmJacobian fd_jacobian(const ArmState& state, const BodyGeometry& geom,
                        double h = 1e-6) {
  ArmJacobian J;
  for (int i = 0; i < 4; ++i) {
    ArmState plus = state, minus = state;
    plus.q[i] += h;
    minus.q[i] -= h;
    J.col(i) = (forward_kinematics(plus, geom).wrist -
                forward_kinematics(minus, geom).wrist) /
               (2.0 * h);
  }
  return J;
}
}  // namespace

TEST_CASE("rotation matrices at zero are identities") {
  const auto R = rotation_matrices(Vec4::Zero());
  for (const auto& Ri : R) CHECK((Ri - Mat3::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("first rotation is a quarter turn about y at q1 = pi/2") {
  const auto R = rotation_matrices(Vec4(kPi / 2.0, 0, 0, 0));
  Mat3 expected;
  expected << 0, 0, 1, 0, 1, 0, -1, 0, 0;
  CHECK((R[0] - expected).norm() < 1e-12);
}

TEST_CASE("rotation matrices are orthonormal with unit determinant") {
  Rng rng(11);
  for (int n = 0; n < 1000; ++n) {
    Vec4 q;
    for (int i = 0; i < 4; ++i) q[i] = rng.uniform(-4.0, 4.0);
    for (const auto& Ri : rotation_matrices(q)) {
      CHECK((Ri.transpose() * Ri - Mat3::Identity()).norm() < 1e-12);
      CHECK(Ri.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward kinematics at rest pose") {
  BodyGeometry geom;
  const ArmState state{Vec4::Zero(), Side::Right};
  const ArmPoints p = forward_kinematics(state, geom, Vec3::Zero());
  CHECK((p.elbow - Vec3(0, 0, -0.3)).norm() < 1e-15);
  CHECK((p.wrist - Vec3(0, 0.25, -0.3)).norm() < 1e-15);
}

TEST_CASE("elbow quarter turn folds the forearm upward") {
  BodyGeometry geom;
  const ArmState state{Vec4(0, 0, 0, kPi / 2.0), Side::Right};
  const ArmPoints p = forward_kinematics(state, geom, Vec3::Zero());
  CHECK((p.wrist - Vec3(0, 0, -0.05)).norm() < 1e-12);
}

TEST_CASE("segment lengths are preserved for random postures") {
  BodyGeometry geom;
  Rng rng(12);
  for (int n = 0; n < 100; ++n) {
    const ArmState state{random_in_limits(rng), Side::Right};
    const ArmPoints p = forward_kinematics(state, geom);
    CHECK((p.elbow - p.shoulder).norm() == doctest::Approx(geom.upper_arm).epsilon(1e-9));
    CHECK((p.wrist - p.elbow).norm() == doctest::Approx(geom.forearm).epsilon(1e-9));
  }
}

TEST_CASE("workspace bound holds everywhere") {
  BodyGeometry geom;
  Rng rng(13);
  for (int n = 0; n < 200; ++n) {
    Vec4 q;
    for (int i = 0; i < 4; ++i) q[i] = rng.uniform(-3.0, 3.0);
    const ArmPoints p = forward_kinematics({q, Side::Right}, geom);
    CHECK((p.wrist - p.shoulder).norm() <= geom.upper_arm + geom.forearm + 1e-12);
  }
}

TEST_CASE("left arm is the y-mirror of the right arm") {
  BodyGeometry geom;
  geom.shoulder_left = Vec3::Zero();
  geom.shoulder_right = Vec3(0.0, -1e-6, 0.0);  // keep origins distinct
  Rng rng(14);
  const Mat3 mirror = Vec3(1.0, -1.0, 1.0).asDiagonal();
  for (int n = 0; n < 50; ++n) {
    const Vec4 q = random_in_limits(rng);
    const ArmPoints l = forward_kinematics({q, Side::Left}, geom, Vec3::Zero());
    const ArmPoints r = forward_kinematics({q, Side::Right}, geom, Vec3::Zero());
    CHECK((l.elbow - mirror * r.elbow).norm() < 1e-12);
    CHECK((l.wrist - mirror * r.wrist).norm() < 1e-12);
  }
}

TEST_CASE("analytic Jacobian matches finite differences") {
  BodyGeometry geom;
  Rng rng(15);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const ArmState state{random_in_limits(rng), Side::Right};
    const ArmJacobian J = position_jacobian(state, geom);
    const ArmJacobian Jfd = fd_jacobian(state, geom);
    const double rel = (J - Jfd).norm() / std::max(1.0, J.norm());
    worst = std::max(worst, rel);
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("Jacobian last column at rest equals the folded forearm direction") {
  BodyGeometry geom;
  const ArmJacobian J = position_jacobian({Vec4::Zero(), Side::Right}, geom);
  CHECK((J.col(3) - Vec3(0, 0, 0.25)).norm() < 1e-12);
}

TEST_CASE("Jacobian scales linearly with segment lengths") {
  BodyGeometry geom, doubled;
  doubled.upper_arm = 2.0 * geom.upper_arm;
  doubled.forearm = 2.0 * geom.forearm;
  Rng rng(16);
  for (int n = 0; n < 20; ++n) {
    const ArmState state{random_in_limits(rng), Side::Right};
    const ArmJacobian J1 = position_jacobian(state, geom);
    const ArmJacobian J2 = position_jacobian(state, doubled);
    CHECK((J2 - 2.0 * J1).norm() < 1e-12);
  }
}

TEST_CASE("elbow Jacobian matches finite differences and ignores q4") {
  BodyGeometry geom;
  Rng rng(17);
  for (int n = 0; n < 100; ++n) {
    const ArmState state{random_in_limits(rng), Side::Right};
    const ArmJacobian J = elbow_jacobian(state, geom);
    CHECK(J.col(3).norm() == doctest::Approx(0.0));
    for (int i = 0; i < 3; ++i) {
      ArmState plus = state, minus = state;
      plus.q[i] += 1e-6;
      minus.q[i] -= 1e-6;
      const Vec3 fd = (forward_kinematics(plus, geom).elbow -
                       forward_kinematics(minus, geom).elbow) /
                      2e-6;
      CHECK((J.col(i) - fd).norm() < 1e-5);
    }
  }
}

TEST_CASE("limit clamping and membership") {
  Vec4 q(-1.0, 4.0, 0.0, 0.1);
  const Vec4 c = clamp_to_limits(q);
  CHECK(c[0] == doctest::Approx(joint_limits::lower[0]));
  CHECK(c[1] == doctest::Approx(joint_limits::upper[1]));
  CHECK(c[2] == 0.0);
  CHECK(c[3] == doctest::Approx(0.1));
  CHECK_FALSE(ArmState{q, Side::Right}.within_limits());
  CHECK(ArmState{c, Side::Right}.within_limits(1e-12));
}

TEST_CASE("geometry validity") {
  BodyGeometry geom;
  CHECK(geom.valid());
  geom.upper_arm = 0.0;
  CHECK_FALSE(geom.valid());
  geom.upper_arm = 0.3;
  geom.shoulder_left = geom.shoulder_right;
  CHECK_FALSE(geom.valid());
}
