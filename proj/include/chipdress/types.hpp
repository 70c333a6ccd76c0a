#pragma once

#include <complex>

#include <Eigen/Dense>

namespace chipdress {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;

using Matrix8c = Eigen::Matrix<Complex, 8, 8>;
using Vector8c = Eigen::Matrix<Complex, 8, 1>;
using Vector8d = Eigen::Matrix<double, 8, 1>;

}  // namespace chipdress
