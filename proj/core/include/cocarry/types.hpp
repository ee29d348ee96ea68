#pragma once

#include <Eigen/Dense>

namespace cocarry {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;

/// 3x4 position Jacobian of the 4-DOF arm model.
using ArmJacobian = Eigen::Matrix<double, 3, 4>;

enum class Side { Left, Right };

inline const char* to_string(Side s) { return s == Side::Left ? "left" : "right"; }

}  // namespace cocarry
