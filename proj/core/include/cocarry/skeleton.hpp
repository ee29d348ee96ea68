#pragma once

#include <array>
#include <numbers>

#include "cocarry/types.hpp"

namespace cocarry {

// Simplified 4-DOF upper limb model. Joint q1 is shoulder
// abduction/adduction (about y), q2 shoulder flexion/extension (about x,
// flexion positive), q3 internal/external shoulder rotation (about z), q4
// elbow flexion/extension (about x). At q = 0 the upper arm hangs along -z
// and the forearm points along +y of the torso frame; the elbow is bent 90
// degrees. The left arm is the right-arm model reflected across the torso
// x-z plane (y negated), so both arms share the same joint-limit box and
// the same scoring semantics.

namespace joint_limits {
inline constexpr std::array<double, 4> lower = {
    -std::numbers::pi / 18.0, -std::numbers::pi / 3.0,
    -std::numbers::pi / 3.0, -std::numbers::pi / 2.0};
inline constexpr std::array<double, 4> upper = {
    17.0 * std::numbers::pi / 18.0, 17.0 * std::numbers::pi / 18.0,
    std::numbers::pi / 2.0, std::numbers::pi / 3.0};
}  // namespace joint_limits

struct ArmState {
  Vec4 q = Vec4::Zero();
  Side side = Side::Right;

  bool within_limits(double tol = 0.0) const;
};

/// Clamp a joint vector onto the joint-limit box.
Vec4 clamp_to_limits(const Vec4& q);

struct BodyGeometry {
  double upper_arm = 0.30;  // d_ua, meters
  double forearm = 0.25;    // d_fa, meters
  Vec3 shoulder_left = Vec3(0.0, 0.18, 0.0);
  Vec3 shoulder_right = Vec3(0.0, -0.18, 0.0);

  bool valid() const;
  const Vec3& shoulder(Side s) const {
    return s == Side::Left ? shoulder_left : shoulder_right;
  }
};

struct ArmPoints {
  Vec3 shoulder;
  Vec3 elbow;
  Vec3 wrist;
};

/// The four elementary rotation matrices of the chain, evaluated at q.
std::array<Mat3, 4> rotation_matrices(const Vec4& q);

/// Elbow and wrist positions in the torso frame, shoulder taken from geom.
ArmPoints forward_kinematics(const ArmState& state, const BodyGeometry& geom);

/// Same, with an explicit shoulder origin (e.g. the observed marker).
ArmPoints forward_kinematics(const ArmState& state, const BodyGeometry& geom,
                             const Vec3& shoulder);

/// 3x4 Jacobian of the wrist position with respect to q.
ArmJacobian position_jacobian(const ArmState& state, const BodyGeometry& geom);

/// 3x4 Jacobian of the elbow position (last column is zero).
ArmJacobian elbow_jacobian(const ArmState& state, const BodyGeometry& geom);

}  // namespace cocarry
