#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "didc/active_set.hpp"
#include "didc/gpgd.hpp"
#include "didc/qp.hpp"
#include "didc/rbd.hpp"

namespace didc {

// Weighting and solver knobs for the contact force QP shared by the
// distributing controllers.
struct QpConfig {
  Vec6 s1 = default_s1();
  double force_weight = kDefaultW;
  double rate_weight = kDefaultV;
  ContactLimits limits{};
  int max_iters = 100;
  double tol = 1e-2;
  int pyramid_facets = 0;  // 0: exact-cone projected solve; >= 4: linearized active set
};

// Force-distribution solve behind both distributing controllers, switched by
// the configured linearization.
inline SolveReport distribute_solve(const ConeQP& qp, const VecX& warm, const QpConfig& cfg) {
  if (cfg.pyramid_facets > 0) return pyramid_qp_solve(qp, cfg.pyramid_facets);
  return gpgd_solve(qp, warm, cfg.max_iters, cfg.tol);
}

struct ControllerDiagnostics {
  Vec18 tau_f = Vec18::Zero();    // fully-actuated generalized force
  Vec6 tau_b = Vec6::Zero();      // base rows of tau_f
  Vec12 tau_j = Vec12::Zero();    // joint rows of tau_f
  Vec12 tau_1 = Vec12::Zero();    // stance torque transmitting f_star
  VecX f_star;                    // distributed contact forces
  Vec6 tau_b_hat = Vec6::Zero();  // wrench read back from the applied torque
  Vec18 epsilon = Vec18::Zero();  // controller-vs-plant mismatch, harness-filled
  SolveReport report;
};

// PD-shaped acceleration command. The orientation rows compare rotations
// through the log map; everything else is plain subtraction. Angular rows
// live in the body frame like the velocity layout.
inline Vec18 commanded_acceleration(const GeneralizedState& s,
                                    const DesiredMotion& d, const Gains& g) {
  Vec18 e = d.q_des - s.q;
  e.segment<3>(3) = orientation_error(rpy_to_rot(d.q_des.segment<3>(3)), s.rotation());
  return d.a_des + g.kp.cwiseProduct(e) + g.kd.cwiseProduct(d.v_des - s.v);
}

// Generalized force that would realize a_cmd if every coordinate, base
// included, had an actuator.
inline Vec18 full_generalized_force(const RobotModel& m, const GeneralizedState& s,
                                    const Vec18& a_cmd) {
  return inverse_dynamics(m, s, a_cmd);
}

// Force the plant model needs beyond what the controller model predicts for
// the same motion. Purely a diagnostic stream; no controller consumes it.
inline Vec18 model_mismatch(const RobotModel& plant, const RobotModel& used,
                            const GeneralizedState& s, const Vec18& a_cmd) {
  return inverse_dynamics(plant, s, a_cmd) - inverse_dynamics(used, s, a_cmd);
}

// Moore-Penrose pseudo-inverse, singular values below rel_cutoff * sigma_max
// treated as zero.
inline MatX pinv(const MatX& a, double rel_cutoff = 1e-8) {
  if (a.rows() == 0 || a.cols() == 0) return MatX::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX& sv = svd.singularValues();
  const double cut = rel_cutoff * sv(0);
  VecX inv = VecX::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// 12x6 map from a base wrench to the stance joint torque that transmits it
// through the contacts: tau_1 = map * wrench. Swing-leg rows are zero because
// their jaa columns are.
inline MatX wrench_torque_map(const MatX& jab, const MatX& jaa) {
  return -jaa.transpose() * pinv(jab.transpose());
}

// Orthogonal projector onto null(map^T): torque directions invisible to the
// transmitted base wrench. Normal-equations form while the Gram matrix is
// well conditioned, column-space removal via SVD otherwise (rank-deficient
// two-leg stances land there).
inline MatX nullspace_projector(const MatX& map) {
  const int n = static_cast<int>(map.rows());
  const MatX gram = map.transpose() * map;
  Eigen::LLT<MatX> llt(gram);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-10) {
    return MatX::Identity(n, n) - map * llt.solve(map.transpose());
  }
  Eigen::JacobiSVD<MatX> svd(map, Eigen::ComputeThinU);
  const VecX& sv = svd.singularValues();
  const double cut = sv.size() > 0 ? 1e-8 * sv(0) : 0.0;
  MatX p = MatX::Identity(n, n);
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) {
      p.noalias() -= svd.matrixU().col(i) * svd.matrixU().col(i).transpose();
    }
  }
  return p;
}

namespace detail {

// Warm start for the force QP; a stance change resets it to an even weight
// share so stale sizes never reach the solver.
inline VecX warm_start(const RobotModel& m, int n_c, const VecX& f_prev) {
  if (f_prev.size() == 3 * n_c) return f_prev;
  VecX f = VecX::Zero(3 * n_c);
  const double share = m.total_mass() * kGravity / std::max(n_c, 1);
  for (int i = 0; i < n_c; ++i) f(3 * i + 2) = share;
  return f;
}

inline void check_stance_legs(const MatX& jaa, const std::vector<int>& legs) {
  for (int r = 0; r < static_cast<int>(legs.size()); ++r) {
    const Mat3 block = jaa.block<3, 3>(3 * r, 3 * legs[r]);
    Eigen::JacobiSVD<Mat3> svd(block);
    if (svd.singularValues()(2) < 1e-6) {
      throw std::runtime_error("controller: stance leg " + std::to_string(legs[r]) +
                               " jacobian is singular");
    }
  }
}

}  // namespace detail

// Distribution stage: realize tau_b through contact forces, then pass tau_j
// through the wrench null space. Fills every diagnostics field except tau_f
// and epsilon. Flight (n_c = 0) hands the joint demand through untouched.
inline std::pair<Vec12, ControllerDiagnostics> didc_distribute(
    const RobotModel& m, const GeneralizedState& s, const ContactSet& c,
    const Vec6& tau_b, const Vec12& tau_j, const QpConfig& cfg, const VecX& f_prev) {
  ControllerDiagnostics diag;
  diag.tau_b = tau_b;
  diag.tau_j = tau_j;
  const int n_c = c.count();
  if (n_c == 0) {
    diag.f_star.resize(0);
    return {tau_j, diag};
  }
  const MatX jc = contact_jacobian(m, s, c);
  const MatX jab = jc.leftCols<kBaseDof>();
  const MatX jaa = jc.rightCols<kNumJoints>();
  detail::check_stance_legs(jaa, c.active());

  const VecX warm = detail::warm_start(m, n_c, f_prev);
  const ConeQP qp = build_qp(jab, tau_b, cfg.s1, cfg.force_weight, cfg.rate_weight,
                             std::vector<ContactLimits>(n_c, cfg.limits), warm);
  diag.report = distribute_solve(qp, warm, cfg);
  diag.f_star = diag.report.f_star;
  diag.tau_1 = -jaa.transpose() * diag.f_star;

  const MatX map = wrench_torque_map(jab, jaa);
  const Vec12 tau = diag.tau_1 + nullspace_projector(map) * tau_j;
  diag.tau_b_hat = pinv(map) * tau;
  return {tau, diag};
}

// Full pipeline: PD acceleration, fully-actuated inverse dynamics, split into
// base and joint demand, then the distribution stage above.
inline std::pair<Vec12, ControllerDiagnostics> didc_torque(
    const RobotModel& m, const GeneralizedState& s, const DesiredMotion& d,
    const Gains& g, const ContactSet& c, const QpConfig& cfg, const VecX& f_prev) {
  const Vec18 tau_f = full_generalized_force(m, s, commanded_acceleration(s, d, g));
  auto [tau, diag] = didc_distribute(m, s, c, tau_f.head<kBaseDof>(),
                                     tau_f.tail<kNumJoints>(), cfg, f_prev);
  diag.tau_f = tau_f;
  return {tau, diag};
}

// Dynamically consistent support null-space projector,
// N_c = I - Minv Jc^T (Jc Minv Jc^T)^-1 Jc. Idempotent, not symmetric.
inline Mat18 support_nullspace(const Mat18& mass, const MatX& jc) {
  const Eigen::LLT<Mat18> mllt(mass);
  const MatX minv_jt = mllt.solve(jc.transpose());
  const MatX lam_inv = jc * minv_jt;
  return Mat18::Identity() - minv_jt * lam_inv.ldlt().solve(jc);
}

// Null-space projection baseline: least-squares joint torque whose projection
// into the support null space matches the projected fully-actuated demand.
// Contact forces are whatever the constraint produces; no cone is enforced.
inline Vec12 nspidc_torque(const RobotModel& m, const GeneralizedState& s,
                           const DesiredMotion& d, const Gains& g, const ContactSet& c) {
  const Vec18 tau_f = full_generalized_force(m, s, commanded_acceleration(s, d, g));
  if (c.count() == 0) return tau_f.tail<kNumJoints>();
  const Mat18 mass = mass_matrix(m, s);
  const MatX jc = contact_jacobian(m, s, c);
  const Mat18 nct = support_nullspace(mass, jc).transpose();
  MatX sel_t = MatX::Zero(kDof, kNumJoints);
  sel_t.bottomRows(kNumJoints).setIdentity();
  return pinv(nct * sel_t) * (nct * tau_f);
}

// Joint-space targets for legs the gait has in flight.
struct SwingCommands {
  Vec12 q = Vec12::Zero();
  Vec12 v = Vec12::Zero();
};

struct BalanceResult {
  Vec12 tau = Vec12::Zero();
  Vec6 wrench = Vec6::Zero();  // base wrench demand fed to the QP
  VecX f_star;
  SolveReport report;
};

// Distribution half of the balance baseline: stance torque from the cone QP
// against an externally supplied wrench demand, swing torque from joint PD
// plus each leg's gravity load, summed with no null-space shielding.
inline BalanceResult balance_distribute(const RobotModel& m, const GeneralizedState& s,
                                        const Vec6& wrench, const ContactSet& c,
                                        const Gains& g, const QpConfig& cfg,
                                        const SwingCommands& swing, const VecX& f_prev) {
  BalanceResult out;
  out.wrench = wrench;
  Vec12 tau = Vec12::Zero();
  const int n_c = c.count();
  if (n_c > 0) {
    const MatX jc = contact_jacobian(m, s, c);
    const MatX jab = jc.leftCols<kBaseDof>();
    const MatX jaa = jc.rightCols<kNumJoints>();
    detail::check_stance_legs(jaa, c.active());
    const VecX warm = detail::warm_start(m, n_c, f_prev);
    const ConeQP qp = build_qp(jab, wrench, cfg.s1, cfg.force_weight, cfg.rate_weight,
                               std::vector<ContactLimits>(n_c, cfg.limits), warm);
    out.report = distribute_solve(qp, warm, cfg);
    out.f_star = out.report.f_star;
    tau = -jaa.transpose() * out.f_star;
  }
  bool any_swing = false;
  for (int leg = 0; leg < kNumLegs; ++leg) any_swing = any_swing || !c.stance[leg];
  if (any_swing) {
    GeneralizedState still;
    still.q = s.q;
    const Vec18 grav = nonlinear_effects(m, still);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (c.stance[leg]) continue;
      for (int j = 0; j < kJointsPerLeg; ++j) {
        const int idx = kJointsPerLeg * leg + j;
        tau(idx) += g.kp(kBaseDof + idx) * (swing.q(idx) - s.q(kBaseDof + idx)) +
                    g.kd(kBaseDof + idx) * (swing.v(idx) - s.v(kBaseDof + idx)) +
                    grav(kBaseDof + idx);
      }
    }
  }
  out.tau = tau;
  return out;
}

// Single-rigid-body balance baseline: wrench demand from PD on the base states
// with gravity feedforward, using total mass plus the trunk's inertia and com
// as the whole-body stand-ins. Moment rows are about the base origin in the
// body frame, matching the contact jacobian layout.
inline BalanceResult balance_controller_torque(
    const RobotModel& m, const GeneralizedState& s, const DesiredMotion& d,
    const Gains& g, const ContactSet& c, const QpConfig& cfg,
    const SwingCommands& swing, const VecX& f_prev) {
  const Mat3 r = s.rotation();
  const Vec3 a_lin =
      d.a_des.segment<3>(0) +
      g.kp.segment<3>(0).cwiseProduct(d.q_des.segment<3>(0) - s.q.segment<3>(0)) +
      g.kd.segment<3>(0).cwiseProduct(d.v_des.segment<3>(0) - s.v.segment<3>(0));
  const Vec3 alpha =
      d.a_des.segment<3>(3) +
      g.kp.segment<3>(3).cwiseProduct(
          orientation_error(rpy_to_rot(d.q_des.segment<3>(3)), r)) +
      g.kd.segment<3>(3).cwiseProduct(d.v_des.segment<3>(3) - s.v.segment<3>(3));
  const Vec3 force = m.total_mass() * (a_lin - gravity_vec());
  Vec6 wrench;
  wrench.head<3>() = force;
  wrench.tail<3>() = m.base.inertia * alpha + m.base.com.cross(r.transpose() * force);
  return balance_distribute(m, s, wrench, c, g, cfg, swing, f_prev);
}

}  // namespace didc
