#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "didc/so3.hpp"

namespace didc {

inline constexpr int kNumLegs = 4;
inline constexpr int kJointsPerLeg = 3;
inline constexpr int kNumJoints = kNumLegs * kJointsPerLeg;
inline constexpr int kBaseDof = 6;
inline constexpr int kDof = kBaseDof + kNumJoints;

// Leg ordering used everywhere: FL = 0, FR = 1, RL = 2, RR = 3.
enum Leg : int { FL = 0, FR = 1, RL = 2, RR = 3 };

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec18 = Eigen::Matrix<double, kDof, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat18 = Eigen::Matrix<double, kDof, kDof>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Generalized coordinates q = [base position; base roll-pitch-yaw; joint angles].
// Generalized velocity v = [world-frame base linear velocity; body-frame angular
// velocity; joint rates]. The Euler-rate map enters only when integrating q.
struct GeneralizedState {
  Vec18 q = Vec18::Zero();
  Vec18 v = Vec18::Zero();

  Vec3 base_pos() const { return q.segment<3>(0); }
  Vec3 rpy() const { return q.segment<3>(3); }
  Mat3 rotation() const { return rpy_to_rot(rpy()); }
  Vec3 base_lin_vel() const { return v.segment<3>(0); }
  Vec3 omega_body() const { return v.segment<3>(3); }
  Vec12 joint_pos() const { return q.segment<12>(6); }
  Vec12 joint_vel() const { return v.segment<12>(6); }
};

struct ContactSet {
  std::array<bool, kNumLegs> stance = {false, false, false, false};

  int count() const {
    int n = 0;
    for (bool s : stance) n += s ? 1 : 0;
    return n;
  }
  std::vector<int> active() const {
    std::vector<int> legs;
    for (int i = 0; i < kNumLegs; ++i)
      if (stance[i]) legs.push_back(i);
    return legs;
  }
  static ContactSet all() { return {{true, true, true, true}}; }
};

struct DesiredMotion {
  Vec18 q_des = Vec18::Zero();
  Vec18 v_des = Vec18::Zero();
  Vec18 a_des = Vec18::Zero();
};

struct Gains {
  Vec18 kp = Vec18::Zero();
  Vec18 kd = Vec18::Zero();
};

}  // namespace didc
