#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace adipc {

using Real = double;
using Index = std::int32_t;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<Real, 6, 1>;
using Vec9 = Eigen::Matrix<Real, 9, 1>;
using Vec12 = Eigen::Matrix<Real, 12, 1>;
using VecX = Eigen::VectorXd;

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat3x2 = Eigen::Matrix<Real, 3, 2>;
using Mat3x12 = Eigen::Matrix<Real, 3, 12>;
using Mat12x3 = Eigen::Matrix<Real, 12, 3>;
using Mat6 = Eigen::Matrix<Real, 6, 6>;
using Mat9 = Eigen::Matrix<Real, 9, 9>;
using Mat9x12 = Eigen::Matrix<Real, 9, 12>;
using Mat12 = Eigen::Matrix<Real, 12, 12>;
using MatX = Eigen::MatrixXd;

constexpr Index kInvalid = -1;

// q layout per affine body: [p, row0(A), row1(A), row2(A)], 12 entries.
inline Vec3 affine_point(const Vec12& q, const Vec3& rest) {
    Mat3 A;
    A.row(0) = q.segment<3>(3).transpose();
    A.row(1) = q.segment<3>(6).transpose();
    A.row(2) = q.segment<3>(9).transpose();
    return A * rest + q.head<3>();
}

} // namespace adipc
