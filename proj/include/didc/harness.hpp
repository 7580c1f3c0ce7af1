#pragma once

// Closed-loop scenario execution and the report generators behind the CLI:
// planner -> swing kinematics -> controller -> latency queue -> physics ->
// contact estimator -> per-tick metrics, plus the dynamics self-check and the
// solver benchmark table.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "didc/bench.hpp"
#include "didc/controller.hpp"
#include "didc/estimator.hpp"
#include "didc/metrics.hpp"
#include "didc/planner.hpp"
#include "didc/scenario.hpp"
#include "didc/sim.hpp"

namespace didc {

// Closed-form leg inverse kinematics from the model's chain offsets: roll
// about x at the hip, then a two-link planar chain about y. The knee solution
// keeps the backward bend (q_knee <= 0). Targets outside the reachable
// annulus are radially clamped, so the map is total.
inline Vec3 leg_ik(const RobotModel& m, int leg, const Vec3& p_base) {
  const Vec3 abd = m.joints[kJointsPerLeg * leg].trans;
  const double d = m.joints[kJointsPerLeg * leg + 1].trans.y();
  const double l1 = -m.joints[kJointsPerLeg * leg + 2].trans.z();
  const double l2 = -m.feet[leg].offset.z();
  const Vec3 p0 = p_base - abd;

  const double r = std::hypot(p0.y(), p0.z());
  const double phi = std::atan2(p0.z(), p0.y());
  const double lateral = std::clamp(d / std::max(r, 1e-9), -1.0, 1.0);
  const double spread = std::acos(lateral);
  // Two roll branches reach the leg plane; take the one nearer zero.
  const double qa = phi + spread;
  const double qb = phi - spread;
  const double q0 = std::abs(std::remainder(qa, 2.0 * M_PI)) <=
                            std::abs(std::remainder(qb, 2.0 * M_PI))
                        ? qa
                        : qb;

  const double c0 = std::cos(q0);
  const double s0 = std::sin(q0);
  // Into the rolled frame, then off the lateral offset: the remaining target
  // lies in the leg's sagittal plane.
  double x = p0.x();
  double z = -s0 * p0.y() + c0 * p0.z();
  double dist = std::hypot(x, z);
  const double lo = std::abs(l1 - l2) + 1e-6;
  const double hi = l1 + l2 - 1e-6;
  const double dist_c = std::clamp(dist, lo, hi);
  if (dist < 1e-9) {
    x = 0.0;
    z = -dist_c;
  } else {
    x *= dist_c / dist;
    z *= dist_c / dist;
  }
  const double c2 = std::clamp(
      (dist_c * dist_c - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double q2 = -std::acos(c2);
  const double a = l1 + l2 * std::cos(q2);
  const double b = l2 * std::sin(q2);
  const double q1 = std::atan2(-a * x + b * z, -a * z - b * x);
  return {std::remainder(q0, 2.0 * M_PI), q1, q2};
}

// Nominal stance posture: abduction zero, knees bent so the feet sit exactly
// on the ground with the base at the given height.
inline GeneralizedState initial_stance_state(const RobotModel& m, double height) {
  const double l1 = -m.joints[2].trans.z();
  const double l2 = -m.feet[0].offset.z();
  const double alpha = std::acos(std::clamp(height / (l1 + l2), 0.0, 1.0));
  GeneralizedState s;
  s.q(2) = height;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    s.q(kBaseDof + kJointsPerLeg * leg + 1) = alpha;
    s.q(kBaseDof + kJointsPerLeg * leg + 2) = -2.0 * alpha;
  }
  return s;
}

struct RunResult {
  std::vector<TickRecord> records;
  std::vector<std::array<Vec3, kNumLegs>> force_true;   // plant contact forces
  std::vector<std::array<Vec3, kNumLegs>> force_est;    // estimator belief
  std::vector<std::array<bool, kNumLegs>> scheduled;    // gait stance per tick
  std::vector<std::array<double, kNumLegs>> stance_age; // s since touchdown, -1 in swing
  std::vector<Vec6> wrench_cmd;  // base rows of the full-actuation torque
  std::vector<Vec6> wrench_hat;  // wrench realized by the distributed forces
  RunMetrics metrics;
  GeneralizedState final_state;
  bool completed = false;
  std::string fault;  // controller or integrator abort reason
};

namespace detail {

// Velocity reference for a swing foot: damped least-squares pull of the leg
// joints toward the world-frame foot velocity, with the base's share removed.
inline Vec3 swing_joint_rates(const MatX& leg_jac, const Vec3& foot_vel_world,
                              const Vec6& base_vel) {
  const Mat3 jj = leg_jac.rightCols<3>().transpose() * leg_jac.rightCols<3>() +
                  1e-8 * Mat3::Identity();
  const Vec3 rhs = leg_jac.rightCols<3>().transpose() *
                   (foot_vel_world - leg_jac.leftCols<kBaseDof>() * base_vel);
  return jj.ldlt().solve(rhs);
}

}  // namespace detail

inline RunResult run_scenario(const RobotModel& m, const Scenario& sc) {
  const WorldConfig& w = sc.world;
  w.validate();
  const int substeps = static_cast<int>(std::lround(w.control_period / w.dt));
  if (std::abs(substeps * w.dt - w.control_period) > 1e-9) {
    throw std::invalid_argument("harness: control period must be a multiple of dt");
  }

  const Gains gains = scenario_gains(sc.gains);

  PlannerState plan;
  plan.k_b = sc.planner.k_b;
  plan.k_theta = sc.planner.k_theta;
  plan.beta = sc.planner.beta;
  plan.height_rate_down = sc.planner.height_rate_down;
  plan.height_rate_up = sc.planner.height_rate_up;
  plan.limits.omega_max = sc.planner.omega_max;
  plan.limits.alpha_max = sc.planner.alpha_max;
  plan.limits.height_min = sc.planner.height_min;
  plan.limits.height_max = sc.planner.height_max;
  // Horizontal acceleration budget from the contact limits: the tangential
  // force one leg can hold at its normal-force cap, spread over the mass.
  plan.limits.a_max = sc.qp.limits.mu * sc.qp.limits.fz_max / m.total_mass();
  plan.height_des = sc.planner.height_max;
  plan.pos_des = Vec3(0.0, 0.0, plan.height_des);

  GeneralizedState s = initial_stance_state(m, plan.height_des);

  EstimatorConfig ecfg;
  ecfg.control_dt = w.control_period;
  ContactEstimator est(m, ecfg);

  LatencyQueue queue(w.latency, w.control_period);
  std::mt19937 rng(static_cast<std::uint32_t>(sc.seed));
  VecX f_prev;

  RunResult out;
  std::array<bool, kNumLegs> prev_sched = {true, true, true, true};
  std::array<double, kNumLegs> touchdown_time = {0.0, 0.0, 0.0, 0.0};

  const int ticks = static_cast<int>(std::lround(sc.duration / w.control_period));
  out.records.reserve(ticks);

  for (int k = 0; k < ticks; ++k) {
    const double t = k * w.control_period;
    const VelocityCommand cmd = command_at(sc.schedule, t);

    std::array<Vec3, kNumLegs> hips, hvels;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      hips[leg] = hip_position(m, s, leg);
      hvels[leg] = hip_velocity(m, s, leg);
    }
    const StepAdaptation steps = adapt_step_and_height(plan, hips, hvels, m, sc.gait,
                                                       w.control_period);
    update_base_reference(plan, cmd, w.control_period);
    update_yaw_reference(plan, cmd, w.control_period);

    const auto phases = gait_phase(t, sc.gait);
    const Kinematics kin = forward_kinematics(m, s);
    std::array<bool, kNumLegs> sched;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      sched[leg] = phases[leg].stance;
      if (!sched[leg] && prev_sched[leg]) {
        plan.swing_start[leg] = kin.foot[leg];
        plan.target_frozen[leg] = false;
      }
      if (sched[leg] && !prev_sched[leg]) touchdown_time[leg] = t;
      if (!sched[leg] && !plan.target_frozen[leg]) {
        plan.swing_target[leg] =
            Vec3(hips[leg].x() + steps.step[leg].x(), hips[leg].y() + steps.step[leg].y(),
                 w.ground_height);
        if (swing_phase(phases[leg].phase, sc.gait.duty[leg]) >= 0.5) {
          plan.target_frozen[leg] = true;
        }
      }
    }
    prev_sched = sched;

    DesiredMotion mo;
    mo.q_des.segment<3>(0) = plan.pos_des;
    mo.q_des.segment<3>(3) = Vec3(0.0, 0.0, plan.yaw_des);
    mo.v_des.segment<3>(0) = plan.vel_des;
    mo.v_des.segment<3>(3) = Vec3(0.0, 0.0, plan.yaw_rate_des);
    mo.a_des.segment<3>(0) = plan.acc_des;
    mo.a_des.segment<3>(3) = Vec3(0.0, 0.0, plan.yaw_acc_des);

    ContactSet contact;
    SwingCommands swing;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const int qi = kBaseDof + kJointsPerLeg * leg;
      ContactSet just_this;
      just_this.stance[leg] = true;
      const MatX jac = contact_jacobian(m, kin, just_this);
      const MatX leg_cols =
          (MatX(3, kBaseDof + 3) << jac.block(0, 0, 3, kBaseDof), jac.block(0, qi, 3, 3))
              .finished();
      if (sched[leg]) {
        // Stance joint references are the leg IK of the measured foot against
        // the desired base pose, with x and y taken from the measured base so
        // the unservoed horizontal channel never bends the legs. Joint-space
        // tracking then pulls height and orientation through the mass
        // coupling, in the same direction as the distributed wrench.
        contact.stance[leg] = true;
        const Mat3 r_des = rpy_to_rot(Vec3(0.0, 0.0, plan.yaw_des));
        const Vec3 p_ik(s.q(0), s.q(1), plan.height_des);
        mo.q_des.segment<3>(qi) =
            leg_ik(m, leg, r_des.transpose() * (kin.foot[leg] - p_ik));
        Vec6 v_b_des;
        v_b_des << plan.vel_des.x(), plan.vel_des.y(), 0.0, 0.0, 0.0, plan.yaw_rate_des;
        mo.v_des.segment<3>(qi) =
            detail::swing_joint_rates(leg_cols, Vec3::Zero(), v_b_des);
        mo.a_des.segment<3>(qi).setZero();
        continue;
      }
      const double ph = swing_phase(phases[leg].phase, sc.gait.duty[leg]);
      const double dur = (1.0 - sc.gait.duty[leg]) * sc.gait.period;
      const SwingSample sw = swing_trajectory(ph, plan.swing_start[leg],
                                              plan.swing_target[leg], sc.gait.step_height);
      const Vec3 p_base = s.rotation().transpose() * (sw.pos - s.base_pos());
      const Vec3 q_leg = leg_ik(m, leg, p_base);
      const Vec3 qd_leg =
          detail::swing_joint_rates(leg_cols, sw.vel / dur, s.v.head<kBaseDof>());
      mo.q_des.segment<3>(qi) = q_leg;
      mo.v_des.segment<3>(qi) = qd_leg;
      mo.a_des.segment<3>(qi).setZero();
      swing.q.segment<3>(kJointsPerLeg * leg) = q_leg;
      swing.v.segment<3>(kJointsPerLeg * leg) = qd_leg;
    }

    Vec12 tau_cmd = Vec12::Zero();
    SolveReport report;
    VecX f_star;
    Vec6 w_cmd = Vec6::Zero(), w_hat = Vec6::Zero();
    try {
      switch (sc.controller) {
        case ControllerKind::kDidc: {
          auto [tau, diag] = didc_torque(m, s, mo, gains, contact, sc.qp, f_prev);
          tau_cmd = tau;
          report = diag.report;
          f_star = diag.f_star;
          w_cmd = diag.tau_b;
          w_hat = diag.tau_b_hat;
          break;
        }
        case ControllerKind::kNspidc:
          tau_cmd = nspidc_torque(m, s, mo, gains, contact);
          break;
        case ControllerKind::kBalance: {
          const BalanceResult br =
              balance_controller_torque(m, s, mo, gains, contact, sc.qp, swing, f_prev);
          tau_cmd = br.tau;
          report = br.report;
          f_star = br.f_star;
          w_cmd = br.wrench;
          break;
        }
      }
    } catch (const std::exception& e) {
      out.fault = e.what();
      break;
    }
    if (f_star.size() > 0) f_prev = f_star;

    const Vec12 applied = queue.step(tau_cmd, rng);
    try {
      for (int i = 0; i < substeps; ++i) s = step_physics(m, w, s, applied);
    } catch (const std::exception& e) {
      out.fault = e.what();
      break;
    }

    const ContactBelief& belief = est.update(s, applied, sched);
    const ContactForces truth = ground_forces(m, w, s);
    const auto fvel = foot_velocities(m, s);

    TickRecord r;
    r.t = (k + 1) * w.control_period;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      r.slip_speed[leg] = fvel[leg].head<2>().norm();
      r.slip_gate[leg] = sched[leg] && truth.touching[leg];
    }
    const Vec3 oerr = orientation_error(rpy_to_rot(mo.q_des.segment<3>(3)), s.rotation());
    r.roll_err = oerr(0);
    r.pitch_err = oerr(1);
    r.power = absolute_power(applied, s.joint_vel());
    r.residual = report.residual;
    r.violation = report.violation;
    r.solve_time = report.solve_time;
    r.iterations = report.iterations;
    r.vel_err = (s.v.head<2>() - plan.vel_des.head<2>()).norm();
    r.latency_ms = queue.last_latency_ms();
    out.records.push_back(r);
    out.force_true.push_back(truth.force);
    out.force_est.push_back(belief.force);
    out.scheduled.push_back(sched);
    out.wrench_cmd.push_back(w_cmd);
    out.wrench_hat.push_back(w_hat);
    std::array<double, kNumLegs> age;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      age[leg] = sched[leg] ? r.t - touchdown_time[leg] : -1.0;
    }
    out.stance_age.push_back(age);

    if (fallen(s)) {
      out.metrics.fell = true;
      out.metrics.fall_time = r.t;
      break;
    }
  }

  const bool fell = out.metrics.fell;
  const double fall_time = out.metrics.fall_time;
  out.metrics = aggregate(out.records);
  out.metrics.fell = fell;
  out.metrics.fall_time = fall_time;
  out.final_state = s;
  out.completed = !fell && out.fault.empty() &&
                  static_cast<int>(out.records.size()) == ticks;
  return out;
}

// ---------------------------------------------------------------------------
// Dynamics self-check: the library's structural invariants evaluated on a
// seeded sweep of random states, reported with their measured residuals.

struct CheckLine {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline std::vector<CheckLine> check_dynamics(const RobotModel& m, int n_states,
                                             std::uint64_t seed) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  double sym = 0.0, min_eig = std::numeric_limits<double>::infinity();
  double crba = 0.0, jac_fd = 0.0;

  for (int it = 0; it < n_states; ++it) {
    GeneralizedState s;
    s.q(2) = 0.4 + 0.2 * u(rng);
    s.q(3) = 0.3 * u(rng);
    s.q(4) = 0.25 * u(rng);
    s.q(5) = 1.5 * u(rng);
    for (int i = kBaseDof; i < kDof; ++i) s.q(i) = 0.8 * u(rng);
    for (int i = 0; i < kDof; ++i) s.v(i) = u(rng);

    const Mat18 mm = mass_matrix(m, s);
    sym = std::max(sym, (mm - mm.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Mat18> eig(mm);
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());

    // Column oracle: with velocity frozen at zero, unit-acceleration inverse
    // dynamics minus its zero-acceleration bias reads off M column by column.
    GeneralizedState still = s;
    still.v.setZero();
    const Vec18 bias = inverse_dynamics(m, still, Vec18::Zero());
    for (int c = 0; c < kDof; ++c) {
      Vec18 a = Vec18::Zero();
      a(c) = 1.0;
      crba = std::max(crba, (inverse_dynamics(m, still, a) - bias - mm.col(c))
                                .cwiseAbs()
                                .maxCoeff());
    }

    const MatX jc = contact_jacobian(m, s, ContactSet::all());
    const double h = 1e-6;
    for (int c = 0; c < kDof; ++c) {
      GeneralizedState sp = s, sn = s;
      sp.q(c) += h;
      sn.q(c) -= h;
      const Kinematics kp = forward_kinematics(m, sp);
      const Kinematics kn = forward_kinematics(m, sn);
      for (int leg = 0; leg < kNumLegs; ++leg) {
        const Vec3 fd = (kp.foot[leg] - kn.foot[leg]) / (2.0 * h);
        Vec3 an = jc.block(3 * leg, 0, 3, kDof).col(c);
        if (c >= 3 && c < 6) {
          // FD in Euler rates; the Jacobian's angular columns act on the body
          // rate, so map the probe through the Euler-rate matrix.
          Vec3 probe = Vec3::Zero();
          probe(c - 3) = 1.0;
          an = jc.block(3 * leg, 3, 3, 3) * (euler_rate_to_omega(s.rpy()) * probe);
        }
        const double scale = 1.0 + fd.norm();
        jac_fd = std::max(jac_fd, (fd - an).norm() / scale);
      }
    }
  }

  // Passive flight drift, the same audit the simulator carries.
  double drift = 0.0;
  {
    GeneralizedState s;
    s.q(2) = 5.0;
    std::mt19937 g2(static_cast<std::uint32_t>(seed) + 1);
    for (int i = kBaseDof; i < kDof; ++i) {
      s.q(i) = 0.5 * u(g2);
      s.v(i) = 0.3 * u(g2);
    }
    s.v.segment<3>(3) = Vec3(0.1 * u(g2), 0.1 * u(g2), 0.1 * u(g2));
    const std::array<Vec3, kNumLegs> no_force = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                                 Vec3::Zero()};
    const double dt = 1e-3;
    double e0 = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vec18 a = forward_dynamics(m, s, Vec12::Zero(), no_force);
      GeneralizedState mid = s;
      mid.v = s.v + 0.5 * dt * a;
      const double e = kinetic_energy(m, mid) + potential_energy(m, mid);
      if (k == 0) {
        e0 = e;
      } else {
        drift = std::max(drift, std::abs(e - e0));
      }
      integrate_semi_implicit(s, a, dt);
    }
  }

  std::vector<CheckLine> lines;
  lines.push_back({"mass matrix symmetry", sym, 1e-10, sym < 1e-10});
  lines.push_back({"mass matrix positive definite (min eig)", min_eig, 0.0, min_eig > 0.0});
  lines.push_back({"inertia column vs inverse dynamics", crba, 1e-8, crba < 1e-8});
  lines.push_back({"contact jacobian vs finite difference", jac_fd, 1e-5, jac_fd < 1e-5});
  lines.push_back({"passive energy drift (J over 1 s)", drift, 1e-3, drift < 1e-3});
  return lines;
}

inline bool print_check_report(std::ostream& os, const std::vector<CheckLine>& lines) {
  bool all = true;
  for (const auto& l : lines) {
    os << (l.pass ? "[PASS] " : "[FAIL] ") << l.name << ": measured " << std::scientific
       << std::setprecision(3) << l.measured;
    if (l.tolerance > 0.0) os << " (tol " << l.tolerance << ")";
    os << std::defaultfloat << "\n";
    all = all && l.pass;
  }
  return all;
}

// ---------------------------------------------------------------------------
// Solver benchmark: matched random instances solved by the exact-cone solver
// and the linearized active-set baseline, one CSV row per (instance, solver).

struct BenchRow {
  std::string solver;
  std::uint64_t seed = 0;
  int n_c = 0;
  double residual = 0.0;
  double time_s = 0.0;
  double violation = 0.0;  // cone metric for every solver
  int iters = 0;
  double objective = 0.0;
};

struct BenchSummary {
  std::vector<BenchRow> rows;
  double gpgd_median_time = 0.0;
  double pyramid_median_time = 0.0;
  double gpgd_max_violation = 0.0;
  bool pass = false;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

inline BenchSummary run_solver_bench(const RobotModel& m, int instances_per_nc,
                                     std::uint64_t seed0, int facets = 4) {
  BenchSummary out;
  std::vector<double> gpgd_times, pyr_times, gpgd_times_nc4;
  for (int n_c = 2; n_c <= 4; ++n_c) {
    for (int i = 0; i < instances_per_nc; ++i) {
      const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
      const BenchInstance inst = make_bench_instance(m, seed, n_c);
      const VecX warm = VecX::Zero(inst.qp.dim());

      auto t0 = std::chrono::steady_clock::now();
      const SolveReport rg = gpgd_solve(inst.qp, warm, 100, 1e-2);
      const double tg =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double vg = inst.qp.cone_violations(rg.f_star).norm();
      out.rows.push_back({"gpgd", seed, n_c, rg.residual, tg, vg, rg.iterations,
                          rg.objective});
      gpgd_times.push_back(tg);
      if (n_c == 4) gpgd_times_nc4.push_back(tg);
      out.gpgd_max_violation = std::max(out.gpgd_max_violation, vg);

      t0 = std::chrono::steady_clock::now();
      const SolveReport rp = pyramid_qp_solve(inst.qp, facets);
      const double tp =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double vp = inst.qp.cone_violations(rp.f_star).norm();
      out.rows.push_back({"pyramid-" + std::to_string(facets), seed, n_c, rp.residual, tp,
                          vp, rp.iterations, rp.objective});
      pyr_times.push_back(tp);
    }
  }
  out.gpgd_median_time = detail::median(gpgd_times_nc4);
  out.pyramid_median_time = detail::median(pyr_times);
  out.pass = out.gpgd_max_violation <= 1e-8 && out.gpgd_median_time < 1e-3;
  return out;
}

inline void write_bench_csv(std::ostream& os, const BenchSummary& b, std::uint64_t seed0) {
  os << "# solver benchmark seed=" << seed0 << "\n";
  os << "solver,seed,n_c,residual,time_s,violation,iters,objective\n";
  for (const auto& r : b.rows) {
    os << r.solver << ',' << r.seed << ',' << r.n_c << ',' << detail::fmt(r.residual) << ','
       << detail::fmt(r.time_s) << ',' << detail::fmt(r.violation) << ',' << r.iters << ','
       << detail::fmt(r.objective) << "\n";
  }
}

inline std::string bench_summary_text(const BenchSummary& b) {
  struct Acc {
    detail::Welford residual, time, violation;
  };
  std::map<std::string, Acc> by_solver;
  for (const auto& r : b.rows) {
    auto& a = by_solver[r.solver];
    a.residual.add(r.residual);
    a.time.add(r.time_s);
    a.violation.add(r.violation);
  }
  std::ostringstream os;
  os << std::scientific << std::setprecision(3);
  for (const auto& [name, a] : by_solver) {
    os << name << ": residual " << a.residual.mean << " +- " << a.residual.std_dev()
       << ", time " << a.time.mean << " +- " << a.time.std_dev() << " s, cone violation "
       << a.violation.mean << " +- " << a.violation.std_dev() << "\n";
  }
  os << "gpgd median (n_c=4) " << b.gpgd_median_time << " s, pyramid median "
     << b.pyramid_median_time << " s, time ratio "
     << (b.pyramid_median_time > 0.0 ? b.gpgd_median_time / b.pyramid_median_time : 0.0)
     << "\n";
  os << "gpgd max cone violation " << b.gpgd_max_violation << "\n";
  os << (b.pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Controller comparison: matched scenario variants across controllers and
// commanded speeds, run in parallel, merged in declaration order.

struct CompareEntry {
  double speed = 0.0;
  ControllerKind controller = ControllerKind::kDidc;
  Scenario scenario;
  RunResult result;
};

struct CompareVerdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CompareReport {
  std::vector<CompareEntry> entries;
  std::vector<CompareVerdict> verdicts;
  bool pass = false;
};

// Builds the matched variant: same world, gait, weights, and seed; only the
// controller, its documented gain scale, and the command schedule differ.
inline Scenario compare_variant(const Scenario& base, ControllerKind ctrl, double speed) {
  Scenario sc = base;
  sc.controller = ctrl;
  sc.gains.gain_scale =
      ctrl == ControllerKind::kNspidc ? base.nspidc_gain_scale : 1.0;
  std::ostringstream name;
  name << base.name << "_" << to_string(ctrl) << "_" << std::fixed << std::setprecision(1)
       << speed;
  sc.name = name.str();
  sc.schedule = {{0.0, 0.0, 0.0, 0.0},
                 {0.5, speed, 0.0, 0.0},
                 {0.5 * sc.duration, -speed, 0.0, 0.0}};
  return sc;
}

inline CompareReport run_compare(const RobotModel& m, const Scenario& base,
                                 const std::vector<double>& speeds) {
  CompareReport rep;
  const std::array<ControllerKind, 3> ctrls = {
      ControllerKind::kDidc, ControllerKind::kNspidc, ControllerKind::kBalance};
  for (double v : speeds) {
    for (ControllerKind c : ctrls) {
      CompareEntry e;
      e.speed = v;
      e.controller = c;
      e.scenario = compare_variant(base, c, v);
      rep.entries.push_back(std::move(e));
    }
  }
  // Each run is independent and single-threaded; fan out, then merge in
  // declaration order regardless of completion order.
  std::vector<std::future<RunResult>> futures;
  futures.reserve(rep.entries.size());
  for (const auto& e : rep.entries) {
    futures.push_back(std::async(std::launch::async,
                                 [&m, sc = e.scenario] { return run_scenario(m, sc); }));
  }
  for (std::size_t i = 0; i < futures.size(); ++i) {
    rep.entries[i].result = futures[i].get();
  }

  const auto find = [&rep](double v, ControllerKind c) -> const RunResult& {
    for (const auto& e : rep.entries) {
      if (e.speed == v && e.controller == c) return e.result;
    }
    throw std::logic_error("compare: missing entry");
  };

  for (double v : speeds) {
    const RunResult& didc = find(v, ControllerKind::kDidc);
    const RunResult& nsp = find(v, ControllerKind::kNspidc);
    const RunResult& bc = find(v, ControllerKind::kBalance);
    std::ostringstream tag;
    tag << std::fixed << std::setprecision(1) << v;

    {
      CompareVerdict ver;
      ver.name = "didc completes at " + tag.str() + " m/s";
      ver.pass = didc.completed;
      ver.detail = didc.completed ? "ok" : "fell or faulted";
      rep.verdicts.push_back(ver);
    }
    if (v >= 0.5) {
      CompareVerdict ver;
      ver.name = "slip ordering didc < nspidc at " + tag.str() + " m/s";
      std::ostringstream d;
      d << std::setprecision(4) << "didc " << didc.metrics.mean_slip << " vs nspidc "
        << nsp.metrics.mean_slip;
      ver.detail = d.str();
      ver.pass = nsp.completed && didc.metrics.mean_slip < nsp.metrics.mean_slip;
      rep.verdicts.push_back(ver);
    }
    {
      CompareVerdict ver;
      ver.name = "orientation ordering didc < bc at " + tag.str() + " m/s";
      std::ostringstream d;
      d << std::setprecision(4) << "didc " << didc.metrics.mean_orient << " vs bc "
        << bc.metrics.mean_orient;
      ver.detail = d.str();
      ver.pass = bc.completed && didc.metrics.mean_orient < bc.metrics.mean_orient;
      rep.verdicts.push_back(ver);
    }
    {
      CompareVerdict ver;
      ver.name = "power ordering didc <= bc at " + tag.str() + " m/s";
      std::ostringstream d;
      d << std::setprecision(4) << "didc " << didc.metrics.mean_power << " vs bc "
        << bc.metrics.mean_power;
      ver.detail = d.str();
      ver.pass = bc.completed && didc.metrics.mean_power <= bc.metrics.mean_power;
      rep.verdicts.push_back(ver);
    }
  }
  rep.pass = true;
  for (const auto& v : rep.verdicts) rep.pass = rep.pass && v.pass;
  return rep;
}

inline std::string compare_report_text(const CompareReport& rep, std::uint64_t hash,
                                       std::uint64_t seed) {
  std::ostringstream os;
  os << "# scenario_hash=" << hash << " seed=" << seed << "\n";
  os << "speed,controller,mean_slip,mean_orient,mean_power,mean_vel_err,fell\n";
  os << std::setprecision(6);
  for (const auto& e : rep.entries) {
    os << e.speed << ',' << to_string(e.controller) << ',' << e.result.metrics.mean_slip
       << ',' << e.result.metrics.mean_orient << ',' << e.result.metrics.mean_power << ','
       << e.result.metrics.mean_vel_err << ',' << (e.result.metrics.fell ? 1 : 0) << "\n";
  }
  for (const auto& v : rep.verdicts) {
    os << (v.pass ? "[PASS] " : "[FAIL] ") << v.name << " (" << v.detail << ")\n";
  }
  os << (rep.pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace didc
