#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace lowthrust {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat66 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wrap angle to [0, 2*pi).
inline double wrap_two_pi(double angle) {
    double a = std::fmod(angle, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    return a;
}

/// Wrap angle to [-pi, pi).
inline double wrap_pi(double angle) {
    double a = wrap_two_pi(angle + kPi);
    return a - kPi;
}

/// Rotation matrix mapping unit vector `from` onto unit vector `to`
/// (rotation about their mutual normal; identity if already aligned).
inline Mat3 rotation_between(const Vec3& from, const Vec3& to) {
    const Vec3 a = from.normalized();
    const Vec3 b = to.normalized();
    const Vec3 axis = a.cross(b);
    const double s = axis.norm();
    const double c = a.dot(b);
    if (s < 1e-15) {
        if (c > 0.0) return Mat3::Identity();
        // antiparallel: rotate pi about any axis orthogonal to `a`
        Vec3 ortho = std::abs(a.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        const Vec3 n = a.cross(ortho).normalized();
        return Eigen::AngleAxisd(kPi, n).toRotationMatrix();
    }
    return Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
}

inline Mat3 rotate_x(double phi) {
    return Eigen::AngleAxisd(phi, Vec3::UnitX()).toRotationMatrix();
}

}  // namespace lowthrust
