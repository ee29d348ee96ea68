#include "cocarry/skeleton.hpp"

#include <algorithm>
#include <cmath>

namespace cocarry {

namespace {

// Rest-pose link vectors: upper arm along -z, forearm along +y.
Vec3 upper_arm_vec(double d_ua) { return Vec3(0.0, 0.0, -d_ua); }
Vec3 forearm_vec(double d_fa) { return Vec3(0.0, d_fa, 0.0); }

// Left arm mirrors the right arm across the torso x-z plane.
Mat3 mirror(Side side) {
  Mat3 m = Mat3::Identity();
  if (side == Side::Left) m(1, 1) = -1.0;
  return m;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

// Derivative of the elementary rotation with respect to its angle.
Mat3 drot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << -s, 0, c, 0, 0, 0, -c, 0, -s;
  return r;
}

Mat3 drot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 0, 0, 0, 0, -s, -c, 0, c, -s;
  return r;
}

Mat3 drot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << -s, -c, 0, c, -s, 0, 0, 0, 0;
  return r;
}

}  // namespace

bool ArmState::within_limits(double tol) const {
  for (int i = 0; i < 4; ++i) {
    if (q[i] < joint_limits::lower[i] - tol || q[i] > joint_limits::upper[i] + tol)
      return false;
  }
  return true;
}

Vec4 clamp_to_limits(const Vec4& q) {
  Vec4 out;
  for (int i = 0; i < 4; ++i)
    out[i] = std::clamp(q[i], joint_limits::lower[i], joint_limits::upper[i]);
  return out;
}

bool BodyGeometry::valid() const {
  return upper_arm > 0.0 && forearm > 0.0 &&
         (shoulder_left - shoulder_right).norm() > 0.0;
}

std::array<Mat3, 4> rotation_matrices(const Vec4& q) {
  return {rot_y(q[0]), rot_x(q[1]), rot_z(q[2]), rot_x(q[3])};
}

ArmPoints forward_kinematics(const ArmState& state, const BodyGeometry& geom) {
  return forward_kinematics(state, geom, geom.shoulder(state.side));
}

ArmPoints forward_kinematics(const ArmState& state, const BodyGeometry& geom,
                             const Vec3& shoulder) {
  const auto r = rotation_matrices(state.q);
  const Mat3 m = mirror(state.side);
  const Mat3 r123 = r[0] * r[1] * r[2];
  ArmPoints pts;
  pts.shoulder = shoulder;
  pts.elbow = shoulder + m * (r123 * upper_arm_vec(geom.upper_arm));
  pts.wrist = shoulder + m * (r123 * (upper_arm_vec(geom.upper_arm) +
                                      r[3] * forearm_vec(geom.forearm)));
  return pts;
}

ArmJacobian position_jacobian(const ArmState& state, const BodyGeometry& geom) {
  const Vec4& q = state.q;
  const Mat3 r1 = rot_y(q[0]), r2 = rot_x(q[1]), r3 = rot_z(q[2]), r4 = rot_x(q[3]);
  const Mat3 m = mirror(state.side);
  const Vec3 inner = upper_arm_vec(geom.upper_arm) + r4 * forearm_vec(geom.forearm);

  ArmJacobian j;
  j.col(0) = m * (drot_y(q[0]) * r2 * r3 * inner);
  j.col(1) = m * (r1 * drot_x(q[1]) * r3 * inner);
  j.col(2) = m * (r1 * r2 * drot_z(q[2]) * inner);
  j.col(3) = m * (r1 * r2 * r3 * (drot_x(q[3]) * forearm_vec(geom.forearm)));
  return j;
}

ArmJacobian elbow_jacobian(const ArmState& state, const BodyGeometry& geom) {
  const Vec4& q = state.q;
  const Mat3 r1 = rot_y(q[0]), r2 = rot_x(q[1]), r3 = rot_z(q[2]);
  const Mat3 m = mirror(state.side);
  const Vec3 ua = upper_arm_vec(geom.upper_arm);

  ArmJacobian j;
  j.col(0) = m * (drot_y(q[0]) * r2 * r3 * ua);
  j.col(1) = m * (r1 * drot_x(q[1]) * r3 * ua);
  j.col(2) = m * (r1 * r2 * drot_z(q[2]) * ua);
  j.col(3).setZero();
  return j;
}

}  // namespace cocarry
