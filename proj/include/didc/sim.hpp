#pragma once

// Desk-scale plant: penalty ground contact with regularized Coulomb friction,
// dense forward dynamics, semi-implicit integration, and a latency queue that
// replays torque commands according to a binned delay distribution. The
// contact model is deliberately independent of the controllers' QP so slip
// and force metrics measure the controller, not a shared solver.

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "didc/model.hpp"
#include "didc/rbd.hpp"
#include "didc/types.hpp"

namespace didc {

inline constexpr double kLatencyBinMs = 5.0;

struct LatencyBin {
  double start_ms = 0.0;
  double probability = 1.0;
};

struct WorldConfig {
  double gravity = kGravity;      // magnitude, m/s^2
  double ground_height = 0.0;     // m
  double mu = 0.7;
  double k_n = 3e4;               // N/m, contact normal stiffness
  double d_n = 1e3;               // N s/m, contact normal damping
  double v_reg = 1e-3;            // m/s, stick regularization velocity
  double dt = 1e-3;               // s, physics step
  double control_period = 2e-3;   // s, command and sensor latch period
  bool freeze_joints = false;     // rigid legs, used by plant-only fixtures
  std::vector<LatencyBin> latency = {{0.0, 1.0}};

  void validate() const {
    if (!(k_n > 0.0) || !(d_n > 0.0)) {
      throw std::invalid_argument("world: contact stiffness and damping must be positive");
    }
    if (!(dt > 0.0) || dt > control_period) {
      throw std::invalid_argument("world: need 0 < dt <= control_period");
    }
    if (!(v_reg > 0.0) || mu < 0.0) {
      throw std::invalid_argument("world: need v_reg > 0 and mu >= 0");
    }
    double total = 0.0;
    for (const auto& b : latency) {
      if (b.start_ms < 0.0 || b.probability < 0.0) {
        throw std::invalid_argument("world: latency bins must be nonnegative");
      }
      total += b.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("world: latency probabilities must sum to 1");
    }
  }
};

struct ContactForces {
  // Eigen members are not zeroed by value-initialization; spell it out.
  std::array<Vec3, kNumLegs> force = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<bool, kNumLegs> touching = {false, false, false, false};
};

// Contact law evaluated at the current state: penalty normal spring-damper
// that never pulls, plus regularized Coulomb friction. Below v_reg the
// tangential force ramps linearly (viscous stick); above it the force
// saturates at the friction cone boundary.
inline ContactForces ground_forces(const RobotModel& m, const WorldConfig& w,
                                   const GeneralizedState& s) {
  ContactForces out;
  const Kinematics k = forward_kinematics(m, s);
  const auto foot_vel = foot_velocities(m, s);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double depth = w.ground_height - k.foot[leg].z();
    if (depth <= 0.0) continue;
    out.touching[leg] = true;
    const double fz = std::max(0.0, w.k_n * depth - w.d_n * foot_vel[leg].z());
    Vec3 f(0.0, 0.0, fz);
    const Eigen::Vector2d vt = foot_vel[leg].head<2>();
    const double speed = vt.norm();
    if (speed > 0.0 && w.mu > 0.0 && fz > 0.0) {
      f.head<2>() = -w.mu * fz * std::min(1.0, speed / w.v_reg) * vt / speed;
    }
    out.force[leg] = f;
  }
  return out;
}

// One physics step: ground forces, forward dynamics, semi-implicit Euler.
// With freeze_joints the robot is the locked composite: only the base rows of
// the equations of motion are solved (joints held by ideal constraints), so
// the trunk rides the penalty springs as one rigid body.
// One physics step at dt. The contact law's velocity-proportional terms
// (normal damping and viscous stick) have slopes far stiffer than explicit
// integration can carry for a light foot, so they are folded into the
// velocity solve: with per-leg damping matrix C, the force -C v_foot(t+dt)
// turns M a = f into (M + dt J^T C J) a = f - J^T C v_foot. Regime selection
// (touching, pulling, stick vs slide) and all remaining force terms use the
// current state, so the law itself is unchanged; the one-step implicit
// damping may transiently exceed the pull-free clamp during separation.
inline GeneralizedState step_physics(const RobotModel& m, const WorldConfig& w,
                                     const GeneralizedState& s, const Vec12& tau) {
  const Kinematics k = forward_kinematics(m, s);
  const auto foot_vel = foot_velocities(m, s);

  Mat18 m_eff = mass_matrix(m, s);
  Vec18 rhs = -nonlinear_effects(m, s, w.gravity);
  rhs.tail<kNumJoints>() += tau;

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double depth = w.ground_height - k.foot[leg].z();
    if (depth <= 0.0) continue;
    const Vec3& vf = foot_vel[leg];
    const double fz = std::max(0.0, w.k_n * depth - w.d_n * vf.z());
    if (fz <= 0.0) continue;

    Vec3 f_ex(0.0, 0.0, w.k_n * depth);
    Vec3 damp(0.0, 0.0, w.d_n);
    const double speed = vf.head<2>().norm();
    if (speed >= w.v_reg) {
      f_ex.head<2>() = -w.mu * fz * vf.head<2>() / speed;
    } else if (w.mu > 0.0) {
      damp.head<2>().setConstant(w.mu * fz / w.v_reg);
    }

    ContactSet one;
    one.stance[leg] = true;
    const MatX jl = contact_jacobian(m, k, one);
    m_eff.noalias() += w.dt * jl.transpose() * damp.asDiagonal() * jl;
    rhs.noalias() += jl.transpose() * (f_ex - damp.cwiseProduct(vf));
  }

  GeneralizedState next = s;
  Vec18 a = Vec18::Zero();
  if (w.freeze_joints) {
    a.head<kBaseDof>() = Mat6(m_eff.topLeftCorner<kBaseDof, kBaseDof>())
                             .llt()
                             .solve(rhs.head<kBaseDof>());
    next.v.segment<kNumJoints>(kBaseDof).setZero();
  } else {
    a = m_eff.llt().solve(rhs);
  }
  integrate_semi_implicit(next, a, w.dt);
  if (!next.q.allFinite() || !next.v.allFinite()) {
    throw std::runtime_error("sim: state diverged to non-finite values");
  }
  return next;
}

// Trunk below standing clearance or rolled past a recoverable attitude.
inline bool fallen(const GeneralizedState& s, double min_height = 0.12,
                   double max_tilt = 1.0) {
  return s.q(2) < min_height || std::abs(s.q(3)) > max_tilt || std::abs(s.q(4)) > max_tilt;
}

// Platform-stable uniform in [0, 1): the distribution classes in <random>
// are implementation-defined, and metrics files must be byte-identical for a
// given seed everywhere.
inline double uniform01(std::mt19937& rng) {
  const std::uint64_t hi = rng();
  const std::uint64_t lo = rng();
  return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
}

// Command replay with sampled transport delay. The applied command is picked
// by the delay bin's start converted to whole control ticks; the uniform
// within-bin refinement only affects the recorded latency, keeping the
// degenerate zero-latency map exactly transparent.
class LatencyQueue {
 public:
  LatencyQueue(std::vector<LatencyBin> bins, double control_period)
      : bins_(std::move(bins)), period_ms_(control_period * 1e3) {
    double max_start = 0.0;
    for (const auto& b : bins_) max_start = std::max(max_start, b.start_ms);
    depth_ = static_cast<int>(max_start / period_ms_) + 1;
  }

  Vec12 step(const Vec12& new_cmd, std::mt19937& rng) {
    queue_.push_front(new_cmd);
    while (static_cast<int>(queue_.size()) > depth_) queue_.pop_back();
    const double u_bin = uniform01(rng);
    double acc = 0.0;
    const LatencyBin* pick = &bins_.back();
    for (const auto& b : bins_) {
      acc += b.probability;
      if (u_bin < acc) {
        pick = &b;
        break;
      }
    }
    last_latency_ms_ = pick->start_ms + uniform01(rng) * kLatencyBinMs;
    int idx = static_cast<int>(pick->start_ms / period_ms_);
    idx = std::min(idx, static_cast<int>(queue_.size()) - 1);
    return queue_[idx];
  }

  double last_latency_ms() const { return last_latency_ms_; }
  int depth() const { return depth_; }

 private:
  std::deque<Vec12> queue_;
  std::vector<LatencyBin> bins_;
  double period_ms_;
  int depth_ = 1;
  double last_latency_ms_ = 0.0;
};

}  // namespace didc
