#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace didc {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

inline Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    return Eigen::Matrix3d::Identity() + skew(w);
  }
  const Eigen::Matrix3d k = skew(w / theta);
  return Eigen::Matrix3d::Identity() + std::sin(theta) * k +
         (1.0 - std::cos(theta)) * k * k;
}

// Rotation log, returns the axis-angle vector with angle in [0, pi].
inline Eigen::Vector3d log_so3(const Eigen::Matrix3d& r) {
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const Eigen::Vector3d s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sn = std::min(0.5 * s.norm(), 1.0);
  const double theta = std::atan2(sn, c);
  if (theta < 1e-4) {
    return 0.5 * s;
  }
  if (c > -0.9) {
    return (theta / (2.0 * sn)) * s;
  }
  // Near the antipode the skew part vanishes; the symmetric part is
  // (1 - cos) * axis * axis^T + cos * I, which stays well conditioned.
  const Eigen::Matrix3d n =
      0.5 * (r + r.transpose()) - c * Eigen::Matrix3d::Identity();
  int k = 0;
  n.diagonal().maxCoeff(&k);
  Eigen::Vector3d axis = n.col(k).normalized();
  if (axis.dot(s) < 0.0) axis = -axis;
  return theta * axis;
}

// Roll-pitch-yaw (X, then Y, then Z fixed axes): R = Rz(yaw) Ry(pitch) Rx(roll).
inline Eigen::Matrix3d rpy_to_rot(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

// Inverse of rpy_to_rot with pitch restricted to (-pi/2, pi/2).
inline Eigen::Vector3d rot_to_rpy(const Eigen::Matrix3d& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

// Body angular velocity from Euler rates: omega_B = euler_rate_to_omega(rpy) * rpy_dot.
inline Eigen::Matrix3d euler_rate_to_omega(const Eigen::Vector3d& rpy) {
  const double cr = std::cos(rpy.x()), sr = std::sin(rpy.x());
  const double cp = std::cos(rpy.y()), sp = std::sin(rpy.y());
  Eigen::Matrix3d w;
  w << 1.0, 0.0, -sp, 0.0, cr, sr * cp, 0.0, -sr, cr * cp;
  return w;
}

// Euler rates from body angular velocity. Singular at |pitch| = pi/2, which the
// state invariants exclude.
inline Eigen::Matrix3d omega_to_euler_rate(const Eigen::Vector3d& rpy) {
  const double cr = std::cos(rpy.x()), sr = std::sin(rpy.x());
  const double cp = std::cos(rpy.y()), tp = std::tan(rpy.y());
  Eigen::Matrix3d e;
  e << 1.0, sr * tp, cr * tp, 0.0, cr, -sr, 0.0, sr / cp, cr / cp;
  return e;
}

// World-frame orientation error log(R_des R^T); zero iff R == R_des.
inline Eigen::Vector3d orientation_error(const Eigen::Matrix3d& r_des,
                                         const Eigen::Matrix3d& r) {
  return log_so3(r_des * r.transpose());
}

}  // namespace didc
