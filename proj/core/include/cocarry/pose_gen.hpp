#pragma once

#include <Eigen/Geometry>

#include "cocarry/types.hpp"

namespace cocarry {

struct Pose {
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

/// Initial and optimized human wrist positions plus the object and cobot
/// end-effector poses, all in the robot frame.
struct GraspConfiguration {
  Vec3 wrist_left, wrist_right;
  Vec3 wrist_left_opt, wrist_right_opt;
  Pose object;
  Pose ee_left, ee_right;
};

struct RelativeRotation {
  Mat3 rotation;
  bool antiparallel = false;  // degenerate axis choice was needed
};

/// Minimal rotation taking the direction of v_init onto the direction of
/// v_opt (Rodrigues form). For antiparallel inputs the axis is an arbitrary
/// unit vector orthogonal to v_init and the result is flagged.
RelativeRotation relative_rotation(const Vec3& v_init, const Vec3& v_opt);

struct TargetPoses {
  Pose object;
  Pose ee_left, ee_right;
  bool antiparallel = false;
};

/// Rigidly transports the object and both end-effector poses by the rotation
/// that maps the initial wrist-pair vector onto the optimized one, anchored
/// at the left wrist.
TargetPoses generate_targets(const GraspConfiguration& g);

}  // namespace cocarry
