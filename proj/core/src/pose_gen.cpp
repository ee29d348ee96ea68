#include "cocarry/pose_gen.hpp"

#include <cmath>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

}  // namespace

RelativeRotation relative_rotation(const Vec3& v_init, const Vec3& v_opt) {
  if (v_init.norm() < 1e-12 || v_opt.norm() < 1e-12)
    throw DimensionMismatch("relative_rotation requires nonzero vectors");
  const Vec3 a = v_init.normalized();
  const Vec3 b = v_opt.normalized();
  const Vec3 cross = a.cross(b);
  const double dot = a.dot(b);
  const double angle = std::atan2(cross.norm(), dot);

  RelativeRotation out;
  if (cross.norm() > 1e-8) {
    const Mat3 s = skew(cross.normalized());
    out.rotation = Mat3::Identity() + std::sin(angle) * s +
                   (1.0 - std::cos(angle)) * s * s;
  } else if (dot > 0.0) {
    out.rotation = Mat3::Identity();
  } else {
    // Antiparallel: pi rotation about any axis orthogonal to v_init.
    Vec3 axis = a.cross(Vec3::UnitX());
    if (axis.norm() < 1e-6) axis = a.cross(Vec3::UnitY());
    axis.normalize();
    const Mat3 s = skew(axis);
    out.rotation = Mat3::Identity() + 2.0 * s * s;  // sin(pi)=0, 1-cos(pi)=2
    out.antiparallel = true;
  }
  return out;
}

TargetPoses generate_targets(const GraspConfiguration& g) {
  const Vec3 v_init = g.wrist_left - g.wrist_right;
  const Vec3 v_opt = g.wrist_left_opt - g.wrist_right_opt;
  const RelativeRotation rel = relative_rotation(v_init, v_opt);
  const Mat3& r = rel.rotation;
  const Eigen::Quaterniond qr(r);

  TargetPoses out;
  out.antiparallel = rel.antiparallel;
  // Object carried along with the left wrist: the wrist-to-object vector is
  // rotated by R and re-anchored at the optimized left wrist.
  out.object.position =
      g.wrist_left_opt + r * (g.object.position - g.wrist_left);
  out.object.orientation = (qr * g.object.orientation).normalized();
  // End effectors keep their object-relative offsets.
  out.ee_left.position =
      out.object.position + r * (g.ee_left.position - g.object.position);
  out.ee_right.position =
      out.object.position + r * (g.ee_right.position - g.object.position);
  out.ee_left.orientation = (qr * g.ee_left.orientation).normalized();
  out.ee_right.orientation = (qr * g.ee_right.orientation).normalized();
  return out;
}

}  // namespace cocarry
