#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "didc/so3.hpp"

using namespace didc;

namespace {

std::mt19937 rng(12345);

Eigen::Vector3d random_rpy() {
  std::uniform_real_distribution<double> ang(-1.3, 1.3);
  return {ang(rng), ang(rng) * 0.9, ang(rng)};  // pitch kept gimbal-safe
}

}  // namespace

TEST_CASE("rpy round trip") {
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d rpy = random_rpy();
    const Eigen::Matrix3d r = rpy_to_rot(rpy);
    REQUIRE((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    REQUIRE((rot_to_rpy(r) - rpy).norm() < 1e-9);
  }
}

TEST_CASE("exp and log are inverse") {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    Eigen::Vector3d w(u(rng), u(rng), u(rng));
    w *= 2.9;  // keep |w| < pi
    if (w.norm() >= M_PI) w *= (M_PI - 1e-3) / w.norm();
    REQUIRE((log_so3(exp_so3(w)) - w).norm() < 1e-9);
  }
  REQUIRE(log_so3(Eigen::Matrix3d::Identity()).norm() == 0.0);
}

TEST_CASE("log handles rotations near pi") {
  const Eigen::Vector3d w = (M_PI - 1e-8) * Eigen::Vector3d(0.0, 1.0, 0.0);
  const Eigen::Vector3d back = log_so3(exp_so3(w));
  REQUIRE((back - w).norm() < 1e-5);
}

TEST_CASE("orientation error basics") {
  const Eigen::Matrix3d r = rpy_to_rot({0.2, -0.1, 0.5});
  REQUIRE(orientation_error(r, r).norm() < 1e-14);

  // single-axis error equals the rotation angle about that axis
  const Eigen::Matrix3d rd = Eigen::AngleAxisd(0.1, Eigen::Vector3d::UnitX()).toRotationMatrix() * r;
  const Eigen::Vector3d e = orientation_error(rd, r);
  REQUIRE(std::abs(e.x() - 0.1) < 1e-12);
  REQUIRE(std::abs(e.y()) < 1e-12);
  REQUIRE(std::abs(e.z()) < 1e-12);
}

TEST_CASE("orientation error matches quaternion log") {
  // oracle: axis-angle of the relative quaternion q_des * q^-1
  for (int i = 0; i < 200; ++i) {
    const Eigen::Matrix3d r = rpy_to_rot(random_rpy());
    const Eigen::Matrix3d rd = rpy_to_rot(random_rpy());
    const Eigen::Quaterniond qrel = Eigen::Quaterniond(rd) * Eigen::Quaterniond(r).conjugate();
    Eigen::AngleAxisd aa(qrel);
    double angle = aa.angle();
    Eigen::Vector3d axis = aa.axis();
    if (angle > M_PI) {
      angle = 2.0 * M_PI - angle;
      axis = -axis;
    }
    REQUIRE((orientation_error(rd, r) - angle * axis).norm() < 1e-9);
  }
}

TEST_CASE("euler rate map matches numeric R_dot") {
  const double h = 1e-7;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d rpy = random_rpy();
    Eigen::Vector3d rate;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    rate << u(rng), u(rng), u(rng);
    const Eigen::Matrix3d r = rpy_to_rot(rpy);
    const Eigen::Matrix3d rdot_fd =
        (rpy_to_rot(rpy + h * rate) - rpy_to_rot(rpy - h * rate)) / (2.0 * h);
    const Eigen::Vector3d omega_body = euler_rate_to_omega(rpy) * rate;
    const Eigen::Matrix3d rdot = r * skew(omega_body);  // R_dot = R [omega_B]x
    REQUIRE((rdot_fd - rdot).norm() < 1e-6);
  }
}

TEST_CASE("euler rate maps are mutual inverses") {
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d rpy = random_rpy();
    const Eigen::Matrix3d prod = omega_to_euler_rate(rpy) * euler_rate_to_omega(rpy);
    REQUIRE((prod - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  }
}
