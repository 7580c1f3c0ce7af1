#pragma once

// Gait scheduling and reference generation: phase-offset contact schedule,
// rate-limited base and yaw references, Raibert foothold placement with
// reachability-driven step clamping and height adaptation, and smooth swing
// trajectories parameterized by swing phase.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "didc/model.hpp"
#include "didc/rbd.hpp"
#include "didc/types.hpp"

namespace didc {

struct GaitConfig {
  double period = 0.5;  // s, one full cycle
  std::array<double, kNumLegs> duty = {0.5, 0.5, 0.5, 0.5};
  std::array<double, kNumLegs> offset = {0.0, 0.5, 0.5, 0.0};
  double step_height = 0.08;  // m, swing apex above the ground plane

  // Diagonal pairs half a cycle apart; FL leads with RR.
  static GaitConfig trot() { return {}; }

  static GaitConfig stand() {
    GaitConfig g;
    g.duty = {1.0, 1.0, 1.0, 1.0};
    g.offset = {0.0, 0.0, 0.0, 0.0};
    g.step_height = 0.0;
    return g;
  }
};

struct LegPhase {
  double phase = 0.0;  // position within the cycle, [0, 1)
  bool stance = true;
};

// Cycle position per leg at time t. A leg is in stance while its phase is
// inside the leading duty fraction of the cycle; duty 1 never lifts off.
inline std::array<LegPhase, kNumLegs> gait_phase(double t, const GaitConfig& g) {
  std::array<LegPhase, kNumLegs> out;
  for (int i = 0; i < kNumLegs; ++i) {
    double ph = std::fmod(t / g.period + g.offset[i], 1.0);
    if (ph < 0.0) ph += 1.0;
    out[i].phase = ph;
    out[i].stance = ph < g.duty[i];
  }
  return out;
}

// Normalized swing progress in [0, 1) for a leg past its stance window.
inline double swing_phase(double cycle_phase, double duty) {
  return (cycle_phase - duty) / (1.0 - duty);
}

struct VelocityCommand {
  Eigen::Vector2d linear = Eigen::Vector2d::Zero();  // body frame, m/s
  double yaw_rate = 0.0;                             // rad/s
};

struct PlannerLimits {
  double a_max = 2.5;        // m/s^2, horizontal acceleration per body axis
  double omega_max = 2.0;    // rad/s, yaw rate
  double alpha_max = 4.0;    // rad/s^2, yaw acceleration
  double height_min = 0.18;  // m
  double height_max = 0.30;  // m, also the height recovered to when unconstrained
};

struct PlannerState {
  Vec3 pos_des = Vec3::Zero();  // world; z mirrors height_des
  Vec3 vel_des = Vec3::Zero();  // world; z pinned to zero
  Vec3 acc_des = Vec3::Zero();
  double yaw_des = 0.0;
  double yaw_rate_des = 0.0;
  double yaw_acc_des = 0.0;
  double height_des = 0.30;

  // Eigen members are not zeroed by value-initialization; spell it out.
  std::array<Vec3, kNumLegs> swing_start = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                            Vec3::Zero()};
  std::array<Vec3, kNumLegs> swing_target = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                             Vec3::Zero()};
  std::array<bool, kNumLegs> target_frozen = {false, false, false, false};

  PlannerLimits limits;
  double k_b = 5.0;      // 1/s, base velocity tracking bandwidth
  double k_theta = 5.0;  // 1/s, yaw rate tracking bandwidth
  double beta = 0.9;     // usable fraction of squared leg extension
  double height_rate_down = 0.10;  // m/s, applied while steps are being clipped
  double height_rate_up = 0.05;    // m/s, recovery toward height_max
};

// Advances the horizontal base reference one step: first-order pull of the
// body-frame velocity toward the command, clamped per axis, rotated through
// the reference yaw, then integrated semi-implicitly (position sees the new
// velocity). The vertical channel copies height_des and carries no rates.
inline void update_base_reference(PlannerState& p, const VelocityCommand& cmd, double dt) {
  const double cy = std::cos(p.yaw_des);
  const double sy = std::sin(p.yaw_des);
  Eigen::Matrix2d rz;
  rz << cy, -sy, sy, cy;
  const Eigen::Vector2d v_body = rz.transpose() * p.vel_des.head<2>();
  Eigen::Vector2d a_body = p.k_b * (cmd.linear - v_body);
  a_body = a_body.cwiseMax(-p.limits.a_max).cwiseMin(p.limits.a_max);
  const Eigen::Vector2d a_world = rz * a_body;
  p.vel_des.head<2>() += a_world * dt;
  p.pos_des.head<2>() += p.vel_des.head<2>() * dt;
  p.acc_des.head<2>() = a_world;
  p.pos_des.z() = p.height_des;
  p.vel_des.z() = 0.0;
  p.acc_des.z() = 0.0;
}

// Yaw mirror of the base update: commanded rate clamped to omega_max, pulled
// with bandwidth k_theta under an alpha_max slew, angle wrapped to (-pi, pi].
inline void update_yaw_reference(PlannerState& p, const VelocityCommand& cmd, double dt) {
  const double w_cmd = std::clamp(cmd.yaw_rate, -p.limits.omega_max, p.limits.omega_max);
  const double alpha =
      std::clamp(p.k_theta * (w_cmd - p.yaw_rate_des), -p.limits.alpha_max, p.limits.alpha_max);
  p.yaw_rate_des += alpha * dt;
  p.yaw_des = std::remainder(p.yaw_des + p.yaw_rate_des * dt, 2.0 * M_PI);
  p.yaw_acc_des = alpha;
}

// Base-frame offset of a leg's thigh attachment at the zero configuration.
inline Vec3 hip_offset_base(const RobotModel& m, int leg) {
  GeneralizedState zero;
  return forward_kinematics(m, zero).origin[3 * leg + 1];
}

inline Vec3 hip_position(const RobotModel& m, const GeneralizedState& s, int leg) {
  return s.base_pos() + s.rotation() * hip_offset_base(m, leg);
}

// World velocity of the hip point rigidly attached to the base.
inline Vec3 hip_velocity(const RobotModel& m, const GeneralizedState& s, int leg) {
  return s.base_lin_vel() + s.rotation() * s.omega_body().cross(hip_offset_base(m, leg));
}

// Velocity-proportional step: half the ground distance the hip covers during
// one stance window.
inline Eigen::Vector2d raibert_offset(const Vec3& hip_vel, double duty, double period) {
  return 0.5 * duty * period * hip_vel.head<2>();
}

// Unclamped touchdown point: hip ground projection plus the Raibert offset.
inline Vec3 foothold_target(const Vec3& hip_pos, const Vec3& hip_vel, const GaitConfig& g,
                            int leg) {
  const Eigen::Vector2d d = raibert_offset(hip_vel, g.duty[leg], g.period);
  return {hip_pos.x() + d.x(), hip_pos.y() + d.y(), 0.0};
}

// Largest horizontal step a leg can take with its hip at the given height,
// keeping the foot inside a sphere of radius sqrt(beta) * leg_extension.
inline double max_step_length(double hip_height, double leg_extension, double beta) {
  if (!(beta > 0.0) || beta > 1.0) {
    throw std::invalid_argument("max_step_length: beta must be in (0, 1]");
  }
  const double reach2 = beta * leg_extension * leg_extension - hip_height * hip_height;
  if (reach2 < 0.0) {
    throw std::domain_error("max_step_length: hip height exceeds reachable radius");
  }
  return std::sqrt(reach2);
}

// Speed at which the Raibert step exactly fills the reachable radius.
inline double max_speed(double beta, double leg_extension, double hip_height, double duty,
                        double period) {
  return 2.0 * max_step_length(hip_height, leg_extension, beta) / (duty * period);
}

struct StepAdaptation {
  std::array<Eigen::Vector2d, kNumLegs> step{};  // clamped Raibert offsets
  bool limited = false;
};

// Recomputes every leg's Raibert offset, clamps each to its hip-height
// reachability radius preserving direction, and nudges the desired height:
// down while any step is being clipped, otherwise back up toward the limit.
inline StepAdaptation adapt_step_and_height(PlannerState& p,
                                            const std::array<Vec3, kNumLegs>& hip_pos,
                                            const std::array<Vec3, kNumLegs>& hip_vel,
                                            const RobotModel& m, const GaitConfig& g,
                                            double dt) {
  StepAdaptation out;
  for (int i = 0; i < kNumLegs; ++i) {
    Eigen::Vector2d d = raibert_offset(hip_vel[i], g.duty[i], g.period);
    const double reach2 = p.beta * m.max_leg_extension * m.max_leg_extension -
                          hip_pos[i].z() * hip_pos[i].z();
    const double d_max = reach2 > 0.0 ? std::sqrt(reach2) : 0.0;
    const double len = d.norm();
    if (len >= d_max) {
      out.limited = true;
      d *= len > 0.0 ? d_max / len : 0.0;
    }
    out.step[i] = d;
  }
  const double rate = out.limited ? -p.height_rate_down : p.height_rate_up;
  p.height_des = std::clamp(p.height_des + rate * dt, p.limits.height_min, p.limits.height_max);
  return out;
}

struct SwingSample {
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();  // per unit swing phase; divide by swing duration for time rates
  Vec3 acc = Vec3::Zero();
};

// Half-cosine blend from start to target with a sin^2 vertical lift. Position
// and velocity are continuous at both ends; touchdown velocity is zero in
// phase units.
inline SwingSample swing_trajectory(double phase, const Vec3& start, const Vec3& target,
                                    double step_height) {
  const double ph = std::clamp(phase, 0.0, 1.0);
  const double c = std::cos(M_PI * ph);
  const double s = std::sin(M_PI * ph);
  const Vec3 delta = target - start;
  SwingSample out;
  out.pos = start + 0.5 * (1.0 - c) * delta;
  out.vel = 0.5 * M_PI * s * delta;
  out.acc = 0.5 * M_PI * M_PI * c * delta;
  out.pos.z() += step_height * s * s;
  out.vel.z() += step_height * M_PI * std::sin(2.0 * M_PI * ph);
  out.acc.z() += 2.0 * step_height * M_PI * M_PI * std::cos(2.0 * M_PI * ph);
  return out;
}

}  // namespace didc
