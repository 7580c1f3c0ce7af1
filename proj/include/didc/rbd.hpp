#pragma once

#include <array>
#include <stdexcept>

#include "didc/model.hpp"
#include "didc/types.hpp"

namespace didc {

inline constexpr double kGravity = 9.81;

inline Vec3 gravity_vec(double g = kGravity) { return {0.0, 0.0, -g}; }

// World-frame poses of every link, joint origin, axis, COM and foot point.
struct Kinematics {
  Mat3 r_base = Mat3::Identity();
  Vec3 p_base = Vec3::Zero();
  Vec3 base_com = Vec3::Zero();
  std::array<Mat3, kNumJoints> rot;
  std::array<Vec3, kNumJoints> origin;
  std::array<Vec3, kNumJoints> axis;
  std::array<Vec3, kNumJoints> com;
  std::array<Vec3, kNumLegs> foot;
};

inline Kinematics forward_kinematics(const RobotModel& m, const GeneralizedState& s) {
  Kinematics k;
  k.r_base = s.rotation();
  k.p_base = s.base_pos();
  k.base_com = k.p_base + k.r_base * m.base.com;
  for (int i = 0; i < kNumJoints; ++i) {
    const auto& jp = m.joints[i];
    const Mat3& rp = jp.parent < 0 ? k.r_base : k.rot[jp.parent];
    const Vec3& pp = jp.parent < 0 ? k.p_base : k.origin[jp.parent];
    k.origin[i] = pp + rp * jp.trans;
    k.rot[i] = rp * jp.rot * Eigen::AngleAxisd(s.q[kBaseDof + i], jp.axis).toRotationMatrix();
    k.axis[i] = k.rot[i] * jp.axis;
    k.com[i] = k.origin[i] + k.rot[i] * m.links[i].com;
  }
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const auto& f = m.feet[leg];
    k.foot[leg] = k.origin[f.parent_link] + k.rot[f.parent_link] * f.offset;
  }
  return k;
}

// World-frame velocity and acceleration of every body for a given generalized
// acceleration. Base angular rows of the state are body-frame, so the world
// angular acceleration is R * domega_B (the transport term R_dot * omega_B
// vanishes identically).
struct BodyMotion {
  Vec3 omega_base, alpha_base, v_base_origin, a_base_origin;
  std::array<Vec3, kNumJoints> omega, alpha, v_origin, a_origin, v_com, a_com;
};

inline BodyMotion propagate_motion(const RobotModel& m, const Kinematics& k,
                                   const GeneralizedState& s, const Vec18& a) {
  BodyMotion b;
  b.omega_base = k.r_base * s.omega_body();
  b.alpha_base = k.r_base * a.segment<3>(3);
  b.v_base_origin = s.base_lin_vel();
  b.a_base_origin = a.segment<3>(0);
  for (int i = 0; i < kNumJoints; ++i) {
    const int p = m.joints[i].parent;
    const Vec3& om_p = p < 0 ? b.omega_base : b.omega[p];
    const Vec3& al_p = p < 0 ? b.alpha_base : b.alpha[p];
    const Vec3& o_p = p < 0 ? k.p_base : k.origin[p];
    const Vec3& vo_p = p < 0 ? b.v_base_origin : b.v_origin[p];
    const Vec3& ao_p = p < 0 ? b.a_base_origin : b.a_origin[p];
    const Vec3 r = k.origin[i] - o_p;
    b.v_origin[i] = vo_p + om_p.cross(r);
    b.a_origin[i] = ao_p + al_p.cross(r) + om_p.cross(om_p.cross(r));
    const double qd = s.v[kBaseDof + i];
    b.omega[i] = om_p + k.axis[i] * qd;
    b.alpha[i] = al_p + om_p.cross(k.axis[i]) * qd + k.axis[i] * a[kBaseDof + i];
    const Vec3 rc = k.com[i] - k.origin[i];
    b.v_com[i] = b.v_origin[i] + b.omega[i].cross(rc);
    b.a_com[i] = b.a_origin[i] + b.alpha[i].cross(rc) + b.omega[i].cross(b.omega[i].cross(rc));
  }
  return b;
}

// Generalized force gamma with M(q) a + eta(q, v) = gamma. Newton-Euler sweep:
// forward motion propagation, then leaf-to-base wrench accumulation. Joint i's
// entry is the accumulated subtree moment about its origin projected on the
// axis; base angular rows are the body-frame moment about the base origin.
inline Vec18 inverse_dynamics(const RobotModel& m, const GeneralizedState& s, const Vec18& a,
                              double g = kGravity) {
  const Kinematics k = forward_kinematics(m, s);
  const BodyMotion b = propagate_motion(m, k, s, a);
  const Vec3 gv = gravity_vec(g);

  std::array<Vec3, kNumJoints> f_acc, n_acc;
  f_acc.fill(Vec3::Zero());
  n_acc.fill(Vec3::Zero());
  Vec3 f_base = Vec3::Zero();
  Vec3 n_base = Vec3::Zero();

  Vec18 gamma = Vec18::Zero();
  for (int i = kNumJoints - 1; i >= 0; --i) {
    const Mat3 iw = k.rot[i] * m.links[i].inertia * k.rot[i].transpose();
    const Vec3 f = m.links[i].mass * (b.a_com[i] - gv);
    const Vec3 n = iw * b.alpha[i] + b.omega[i].cross(iw * b.omega[i]);
    f_acc[i] += f;
    n_acc[i] += n + (k.com[i] - k.origin[i]).cross(f);
    gamma[kBaseDof + i] = k.axis[i].dot(n_acc[i]);
    const int p = m.joints[i].parent;
    if (p >= 0) {
      f_acc[p] += f_acc[i];
      n_acc[p] += n_acc[i] + (k.origin[i] - k.origin[p]).cross(f_acc[i]);
    } else {
      f_base += f_acc[i];
      n_base += n_acc[i] + (k.origin[i] - k.p_base).cross(f_acc[i]);
    }
  }

  const Mat3 iw_base = k.r_base * m.base.inertia * k.r_base.transpose();
  const Vec3 rc = k.base_com - k.p_base;
  const Vec3 a_bc = b.a_base_origin + b.alpha_base.cross(rc) +
                    b.omega_base.cross(b.omega_base.cross(rc));
  const Vec3 f0 = m.base.mass * (a_bc - gv);
  const Vec3 n0 = iw_base * b.alpha_base + b.omega_base.cross(iw_base * b.omega_base);
  f_base += f0;
  n_base += n0 + rc.cross(f0);

  gamma.segment<3>(0) = f_base;
  gamma.segment<3>(3) = k.r_base.transpose() * n_base;
  return gamma;
}

inline Vec18 nonlinear_effects(const RobotModel& m, const GeneralizedState& s,
                               double g = kGravity) {
  return inverse_dynamics(m, s, Vec18::Zero(), g);
}

namespace detail {

// 6x6 spatial inertia at the world origin, angular coordinates first, so that
// kinetic energy is 0.5 [omega; v_O]^T I_sp [omega; v_O].
inline Mat6 spatial_inertia_at_origin(double mass, const Vec3& com_w, const Mat3& inertia_w) {
  const Mat3 cx = skew(com_w);
  Mat6 sp;
  sp.topLeftCorner<3, 3>() = inertia_w - mass * cx * cx;
  sp.topRightCorner<3, 3>() = mass * cx;
  sp.bottomLeftCorner<3, 3>() = -mass * cx;
  sp.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return sp;
}

}  // namespace detail

// Composite-rigid-body mass matrix. All spatial quantities live at the world
// origin, so subtree composites are plain sums and no Plucker transforms are
// needed at this scale.
inline Mat18 mass_matrix(const RobotModel& m, const GeneralizedState& s) {
  const Kinematics k = forward_kinematics(m, s);

  std::array<Mat6, kNumJoints> comp;
  for (int i = 0; i < kNumJoints; ++i) {
    comp[i] = detail::spatial_inertia_at_origin(
        m.links[i].mass, k.com[i], k.rot[i] * m.links[i].inertia * k.rot[i].transpose());
  }
  Mat6 comp_base = detail::spatial_inertia_at_origin(
      m.base.mass, k.base_com, k.r_base * m.base.inertia * k.r_base.transpose());
  for (int i = kNumJoints - 1; i >= 0; --i) {
    const int p = m.joints[i].parent;
    if (p >= 0) {
      comp[p] += comp[i];
    } else {
      comp_base += comp[i];
    }
  }

  auto joint_motion = [&](int i) {
    Vec6 v;
    v << k.axis[i], k.origin[i].cross(k.axis[i]);
    return v;
  };
  Mat6 base_motion;  // columns: world linear velocity rows, then body angular rows
  for (int c = 0; c < 3; ++c) {
    base_motion.col(c) << Vec3::Zero(), Vec3::Unit(c);
    const Vec3 ax = k.r_base.col(c);
    base_motion.col(3 + c) << ax, k.p_base.cross(ax);
  }

  Mat18 mm = Mat18::Zero();
  mm.topLeftCorner<6, 6>() = base_motion.transpose() * comp_base * base_motion;
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec6 sj = joint_motion(j);
    const Vec6 icsj = comp[j] * sj;
    mm.block<6, 1>(0, kBaseDof + j) = base_motion.transpose() * icsj;
    mm.block<1, 6>(kBaseDof + j, 0) = mm.block<6, 1>(0, kBaseDof + j).transpose();
    for (int i = j; i >= 0; i = m.joints[i].parent) {
      mm(kBaseDof + i, kBaseDof + j) = joint_motion(i).dot(icsj);
      mm(kBaseDof + j, kBaseDof + i) = mm(kBaseDof + i, kBaseDof + j);
    }
  }
  return mm;
}

// Stacked world-frame point Jacobian of the active feet, rows in ascending leg
// order, columns [base linear | base angular (body) | joints]. The base angular
// block is -skew(p - r_b) R, whose transpose is the R^T skew(p - r_b) moment
// map of the force-distribution wrench.
inline MatX contact_jacobian(const RobotModel& m, const Kinematics& k, const ContactSet& c) {
  const auto legs = c.active();
  MatX j = MatX::Zero(3 * static_cast<int>(legs.size()), kDof);
  for (int r = 0; r < static_cast<int>(legs.size()); ++r) {
    const int leg = legs[r];
    const Vec3& p = k.foot[leg];
    j.block<3, 3>(3 * r, 0) = Mat3::Identity();
    j.block<3, 3>(3 * r, 3) = -skew(p - k.p_base) * k.r_base;
    for (int jn = m.feet[leg].parent_link; jn >= 0; jn = m.joints[jn].parent) {
      j.block<3, 1>(3 * r, kBaseDof + jn) = k.axis[jn].cross(p - k.origin[jn]);
    }
  }
  return j;
}

inline MatX contact_jacobian(const RobotModel& m, const GeneralizedState& s, const ContactSet& c) {
  return contact_jacobian(m, forward_kinematics(m, s), c);
}

// Velocity-product foot acceleration J_dot * qdot, same row order as
// contact_jacobian.
inline VecX jacobian_dot_qdot(const RobotModel& m, const GeneralizedState& s, const ContactSet& c) {
  const Kinematics k = forward_kinematics(m, s);
  const BodyMotion b = propagate_motion(m, k, s, Vec18::Zero());
  const auto legs = c.active();
  VecX bias(3 * static_cast<int>(legs.size()));
  for (int r = 0; r < static_cast<int>(legs.size()); ++r) {
    const int cal = m.feet[legs[r]].parent_link;
    const Vec3 rc = k.foot[legs[r]] - k.origin[cal];
    bias.segment<3>(3 * r) = b.a_origin[cal] + b.alpha[cal].cross(rc) +
                             b.omega[cal].cross(b.omega[cal].cross(rc));
  }
  return bias;
}

inline std::array<Vec3, kNumLegs> foot_velocities(const RobotModel& m,
                                                  const GeneralizedState& s) {
  const Kinematics k = forward_kinematics(m, s);
  const BodyMotion b = propagate_motion(m, k, s, Vec18::Zero());
  std::array<Vec3, kNumLegs> v;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const int cal = m.feet[leg].parent_link;
    v[leg] = b.v_origin[cal] + b.omega[cal].cross(k.foot[leg] - k.origin[cal]);
  }
  return v;
}

// Dense forward dynamics: M a = S^T tau + sum_leg J_leg^T f_leg - eta, solved
// with a Cholesky factorization of the SPD mass matrix.
inline Vec18 forward_dynamics(const RobotModel& m, const GeneralizedState& s, const Vec12& tau,
                              const std::array<Vec3, kNumLegs>& foot_force,
                              double g = kGravity) {
  const Mat18 mm = mass_matrix(m, s);
  Vec18 rhs = -nonlinear_effects(m, s, g);
  rhs.segment<kNumJoints>(kBaseDof) += tau;
  const Kinematics k = forward_kinematics(m, s);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (foot_force[leg].isZero()) continue;
    ContactSet one;
    one.stance[leg] = true;
    rhs += contact_jacobian(m, k, one).transpose() * foot_force[leg];
  }
  return mm.llt().solve(rhs);
}

inline double kinetic_energy(const RobotModel& m, const GeneralizedState& s) {
  return 0.5 * s.v.dot(mass_matrix(m, s) * s.v);
}

inline double potential_energy(const RobotModel& m, const GeneralizedState& s,
                               double g = kGravity) {
  const Kinematics k = forward_kinematics(m, s);
  double e = m.base.mass * k.base_com.z();
  for (int i = 0; i < kNumJoints; ++i) e += m.links[i].mass * k.com[i].z();
  return g * e;
}

// Semi-implicit Euler: velocity first, then coordinates with the updated
// velocity. The body angular rate passes through the Euler-rate map only here.
inline void integrate_semi_implicit(GeneralizedState& s, const Vec18& a, double dt) {
  s.v += a * dt;
  s.q.segment<3>(0) += s.v.segment<3>(0) * dt;
  s.q.segment<3>(3) += omega_to_euler_rate(s.rpy()) * s.v.segment<3>(3) * dt;
  s.q.segment<kNumJoints>(kBaseDof) += s.v.segment<kNumJoints>(kBaseDof) * dt;
}

// Perturb a state along a generalized-velocity direction (orientation rows are
// a body-frame rotation increment). Used by finite-difference checks.
inline GeneralizedState state_boxplus(const GeneralizedState& s, const Vec18& dq) {
  GeneralizedState r = s;
  r.q.segment<3>(0) += dq.segment<3>(0);
  r.q.segment<3>(3) = rot_to_rpy(s.rotation() * exp_so3(dq.segment<3>(3)));
  r.q.segment<kNumJoints>(kBaseDof) += dq.segment<kNumJoints>(kBaseDof);
  return r;
}

}  // namespace didc
