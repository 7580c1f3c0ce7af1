#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>

#include "didc/planner.hpp"
#include "didc/rbd.hpp"
#include "test_util.hpp"

using namespace didc;

namespace {

// Unsaturated first-order pull integrated k steps from rest:
// v_k = vc * (1 - (1 - K dt)^k).
double first_order_discrete(double vc, double k_gain, double dt, int k) {
  return vc * (1.0 - std::pow(1.0 - k_gain * dt, k));
}

std::array<Vec3, kNumLegs> uniform_hips(double z) {
  std::array<Vec3, kNumLegs> h;
  h.fill(Vec3(0.0, 0.0, z));
  return h;
}

std::array<Vec3, kNumLegs> uniform_vels(const Vec3& v) {
  std::array<Vec3, kNumLegs> out;
  out.fill(v);
  return out;
}

}  // namespace

TEST_CASE("base reference tracks commands through the reference yaw frame") {
  const double dt = 2e-3;

  SECTION("unsaturated response matches the discrete closed form") {
    PlannerState p;
    VelocityCommand cmd;
    cmd.linear << 0.3, 0.0;  // peak accel 1.5 < a_max
    for (int k = 1; k <= 2000; ++k) {
      update_base_reference(p, cmd, dt);
      const double expect = first_order_discrete(0.3, p.k_b, dt, k);
      REQUIRE(p.vel_des.x() == Catch::Approx(expect).epsilon(1e-9).margin(1e-12));
    }
    CHECK(p.vel_des.x() == Catch::Approx(0.3).margin(1e-6));
    CHECK(p.vel_des.y() == 0.0);
    CHECK(p.vel_des.z() == 0.0);
    CHECK(p.acc_des.z() == 0.0);
    CHECK(p.pos_des.z() == p.height_des);
  }

  SECTION("saturated response ramps at exactly a_max") {
    PlannerState p;
    VelocityCommand cmd;
    cmd.linear << 2.0, 0.0;  // demand 10 m/s^2, clamp at 2.5
    // Saturation holds while k_b * (2 - v) >= a_max, i.e. v <= 1.5.
    const int ramp_steps = 200;  // v = 1.0 at the end, well inside the ramp
    for (int k = 0; k < ramp_steps; ++k) update_base_reference(p, cmd, dt);
    const double a_max = p.limits.a_max;
    CHECK(p.vel_des.x() == Catch::Approx(a_max * ramp_steps * dt).margin(1e-10));
    const double pos_expect = a_max * dt * dt * ramp_steps * (ramp_steps + 1) / 2.0;
    CHECK(p.pos_des.x() == Catch::Approx(pos_expect).margin(1e-10));
    for (int k = 0; k < 4000; ++k) update_base_reference(p, cmd, dt);
    CHECK(p.vel_des.x() == Catch::Approx(2.0).margin(1e-6));
  }

  SECTION("body command rotates into the world through yaw_des") {
    PlannerState p;
    p.yaw_des = M_PI / 2.0;
    VelocityCommand cmd;
    cmd.linear << 0.4, 0.0;
    for (int k = 1; k <= 1000; ++k) {
      update_base_reference(p, cmd, dt);
      const double expect = first_order_discrete(0.4, p.k_b, dt, k);
      REQUIRE(std::abs(p.vel_des.x()) < 1e-12);
      REQUIRE(p.vel_des.y() == Catch::Approx(expect).epsilon(1e-9).margin(1e-12));
    }
    CHECK(std::abs(p.pos_des.x()) < 1e-9);
    CHECK(p.pos_des.y() > 0.3);
  }

  SECTION("vertical channel copies height_des with zero rates") {
    PlannerState p;
    p.height_des = 0.27;
    VelocityCommand cmd;
    cmd.linear << 1.0, -0.5;
    for (int k = 0; k < 50; ++k) update_base_reference(p, cmd, dt);
    CHECK(p.pos_des.z() == 0.27);
    CHECK(p.vel_des.z() == 0.0);
    CHECK(p.acc_des.z() == 0.0);
  }
}

TEST_CASE("yaw reference obeys rate and acceleration limits") {
  const double dt = 2e-3;

  SECTION("over-limit command clamps to omega_max and ramps at alpha_max") {
    PlannerState p;
    VelocityCommand cmd;
    cmd.yaw_rate = 3.0;  // clamped to 2.0
    // Slew saturates while k_theta * (2 - w) >= alpha_max, i.e. w <= 1.2.
    const int ramp_steps = 100;  // w = 0.8 at the end
    double expect_yaw = 0.0;
    for (int k = 1; k <= ramp_steps; ++k) {
      update_yaw_reference(p, cmd, dt);
      const double w = p.limits.alpha_max * k * dt;
      expect_yaw += w * dt;
      REQUIRE(p.yaw_rate_des == Catch::Approx(w).margin(1e-12));
      REQUIRE(p.yaw_acc_des == Catch::Approx(p.limits.alpha_max).margin(1e-12));
    }
    CHECK(p.yaw_des == Catch::Approx(expect_yaw).margin(1e-10));
    for (int k = 0; k < 4000; ++k) update_yaw_reference(p, cmd, dt);
    CHECK(p.yaw_rate_des == Catch::Approx(2.0).margin(1e-6));
    const double before = p.yaw_des;
    update_yaw_reference(p, cmd, dt);
    const double step = std::remainder(p.yaw_des - before, 2.0 * M_PI);
    CHECK(step == Catch::Approx(2.0 * dt).margin(1e-6));
  }

  SECTION("angle stays wrapped during sustained rotation") {
    PlannerState p;
    VelocityCommand cmd;
    cmd.yaw_rate = 1.5;
    for (int k = 0; k < 20000; ++k) {
      update_yaw_reference(p, cmd, dt);
      REQUIRE(std::abs(p.yaw_des) <= M_PI + 1e-12);
    }
  }

  SECTION("reversal decelerates through zero without overshooting the slew") {
    PlannerState p;
    p.yaw_rate_des = 2.0;
    VelocityCommand cmd;
    cmd.yaw_rate = -2.0;
    double prev = p.yaw_rate_des;
    for (int k = 0; k < 3000; ++k) {
      update_yaw_reference(p, cmd, dt);
      REQUIRE(prev - p.yaw_rate_des <= p.limits.alpha_max * dt + 1e-12);
      prev = p.yaw_rate_des;
    }
    CHECK(p.yaw_rate_des == Catch::Approx(-2.0).margin(1e-6));
  }
}

TEST_CASE("gait phase schedules diagonal pairs and degenerates to standing") {
  const GaitConfig trot = GaitConfig::trot();

  SECTION("trot start: leading diagonal on the ground, other pair lifted") {
    const auto ph = gait_phase(0.0, trot);
    CHECK(ph[0].stance);
    CHECK(ph[3].stance);
    CHECK_FALSE(ph[1].stance);
    CHECK_FALSE(ph[2].stance);
    CHECK(ph[0].phase == 0.0);
    CHECK(ph[1].phase == 0.5);
  }

  SECTION("exactly two stance legs at every instant, always a diagonal") {
    for (int k = 0; k <= 1000; ++k) {
      const double t = 1e-3 * k;
      const auto ph = gait_phase(t, trot);
      int n = 0;
      for (const auto& lp : ph) n += lp.stance ? 1 : 0;
      REQUIRE(n == 2);
      REQUIRE(ph[0].stance == ph[3].stance);
      REQUIRE(ph[1].stance == ph[2].stance);
      REQUIRE(ph[0].stance != ph[1].stance);
    }
  }

  SECTION("standing gait never lifts a leg") {
    const GaitConfig stand = GaitConfig::stand();
    for (int k = 0; k <= 1000; ++k) {
      const auto ph = gait_phase(1e-3 * k, stand);
      for (const auto& lp : ph) REQUIRE(lp.stance);
    }
  }

  SECTION("periodic in the gait period and defined for negative time") {
    const auto a = gait_phase(0.137, trot);
    const auto b = gait_phase(0.137 + trot.period, trot);
    for (int i = 0; i < kNumLegs; ++i) {
      REQUIRE(a[i].phase == Catch::Approx(b[i].phase).margin(1e-9));
      REQUIRE(a[i].stance == b[i].stance);
    }
    const auto c = gait_phase(-0.1, trot);
    for (const auto& lp : c) {
      REQUIRE(lp.phase >= 0.0);
      REQUIRE(lp.phase < 1.0);
    }
  }

  SECTION("swing phase normalizes the post-stance window") {
    CHECK(swing_phase(0.5, 0.5) == 0.0);
    CHECK(swing_phase(0.75, 0.5) == Catch::Approx(0.5).margin(1e-15));
    CHECK(swing_phase(0.999, 0.5) == Catch::Approx(0.998).margin(1e-12));
  }
}

TEST_CASE("foothold target applies the velocity-proportional offset") {
  const GaitConfig trot = GaitConfig::trot();

  SECTION("stationary hip lands directly underneath") {
    const Vec3 hip(0.19, 0.13, 0.29);
    const Vec3 t = foothold_target(hip, Vec3::Zero(), trot, 0);
    CHECK(t.x() == hip.x());
    CHECK(t.y() == hip.y());
    CHECK(t.z() == 0.0);
  }

  SECTION("forward motion shifts the target half a stance of travel") {
    const Vec3 hip(0.19, 0.13, 0.29);
    const Vec3 t = foothold_target(hip, Vec3(1.0, 0.0, 0.0), trot, 0);
    // 0.5 * duty * period * v = 0.5 * 0.5 * 0.5 * 1 = 0.125.
    CHECK(t.x() == Catch::Approx(hip.x() + 0.125).margin(1e-15));
    CHECK(t.y() == Catch::Approx(hip.y()).margin(1e-15));
  }

  SECTION("vertical hip velocity does not move the target") {
    const Vec3 hip(0.19, 0.13, 0.29);
    const Vec3 t = foothold_target(hip, Vec3(0.0, 0.0, -2.0), trot, 0);
    CHECK(t.x() == hip.x());
    CHECK(t.y() == hip.y());
  }
}

TEST_CASE("hip kinematics match the model and a finite-difference flow") {
  const RobotModel& m = testutil::model();

  SECTION("zero-configuration offsets sit at the thigh attachments") {
    const Vec3 fl = hip_offset_base(m, 0);
    CHECK(fl.x() == Catch::Approx(0.1934).margin(1e-12));
    CHECK(fl.y() == Catch::Approx(0.1420).margin(1e-12));
    CHECK(fl.z() == Catch::Approx(0.0).margin(1e-12));
    const Vec3 fr = hip_offset_base(m, 1);
    CHECK(fr.y() == Catch::Approx(-0.1420).margin(1e-12));
    const Vec3 rl = hip_offset_base(m, 2);
    CHECK(rl.x() == Catch::Approx(-0.1934).margin(1e-12));
  }

  SECTION("standing hips carry the base height") {
    const GeneralizedState s = testutil::standing_state(0.30);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      CHECK(hip_position(m, s, leg).z() == Catch::Approx(0.30).margin(1e-12));
      CHECK(hip_velocity(m, s, leg).norm() == 0.0);
    }
  }

  SECTION("hip velocity is the time derivative of hip position") {
    std::mt19937 rng(77);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
      const GeneralizedState s = testutil::random_state(rng, 0.5);
      for (int leg = 0; leg < kNumLegs; ++leg) {
        GeneralizedState fwd = s;
        integrate_semi_implicit(fwd, Vec18::Zero(), h);
        const Vec3 fd = (hip_position(m, fwd, leg) - hip_position(m, s, leg)) / h;
        const Vec3 an = hip_velocity(m, s, leg);
        REQUIRE((fd - an).norm() < 1e-5 * (1.0 + an.norm()));
      }
    }
  }
}

TEST_CASE("step length and speed limits follow the reachable sphere") {
  SECTION("published geometry") {
    // sqrt(0.42^2 - 0.30^2) = 0.29394 at full extension.
    CHECK(max_step_length(0.30, 0.42, 1.0) == Catch::Approx(0.2939387).margin(1e-6));
    CHECK(max_speed(1.0, 0.42, 0.30, 0.5, 0.5) == Catch::Approx(2.3515102).margin(1e-6));
  }

  SECTION("boundary and domain errors") {
    CHECK(max_step_length(0.42, 0.42, 1.0) == 0.0);
    CHECK_THROWS_AS(max_step_length(0.43, 0.42, 1.0), std::domain_error);
    CHECK_THROWS_AS(max_step_length(0.30, 0.42, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(max_step_length(0.30, 0.42, 1.2), std::invalid_argument);
  }

  SECTION("monotone in hip height and margin factor") {
    double prev = max_step_length(0.10, 0.42, 0.9);
    for (double z = 0.12; z < 0.38; z += 0.02) {
      const double d = max_step_length(z, 0.42, 0.9);
      REQUIRE(d < prev);
      prev = d;
    }
    CHECK(max_speed(0.9, 0.42, 0.30, 0.5, 0.5) < max_speed(1.0, 0.42, 0.30, 0.5, 0.5));
    CHECK(max_speed(0.9, 0.42, 0.25, 0.5, 0.5) > max_speed(0.9, 0.42, 0.30, 0.5, 0.5));
  }
}

TEST_CASE("step adaptation clamps reach and drives the height schedule") {
  const RobotModel& m = testutil::model();
  const GaitConfig trot = GaitConfig::trot();
  const double dt = 2e-3;

  SECTION("within limits: steps pass through and height recovers upward") {
    PlannerState p;
    p.height_des = 0.25;
    const auto hips = uniform_hips(0.25);
    const auto vels = uniform_vels(Vec3(0.5, 0.0, 0.0));
    const auto out = adapt_step_and_height(p, hips, vels, m, trot, dt);
    CHECK_FALSE(out.limited);
    for (const auto& d : out.step) {
      CHECK(d.x() == Catch::Approx(0.0625).margin(1e-15));
      CHECK(d.y() == 0.0);
    }
    CHECK(p.height_des == Catch::Approx(0.25 + p.height_rate_up * dt).margin(1e-15));
    for (int k = 0; k < 100000; ++k) adapt_step_and_height(p, hips, vels, m, trot, dt);
    CHECK(p.height_des == p.limits.height_max);
  }

  SECTION("over limit: direction-preserving clamp and height decrement") {
    PlannerState p;
    p.height_des = 0.30;
    const auto hips = uniform_hips(0.30);
    const auto vels = uniform_vels(Vec3(4.0, 3.0, 0.0));  // |d| = 0.625
    const auto out = adapt_step_and_height(p, hips, vels, m, trot, dt);
    CHECK(out.limited);
    const double d_max = max_step_length(0.30, m.max_leg_extension, p.beta);
    for (const auto& d : out.step) {
      REQUIRE(d.norm() == Catch::Approx(d_max).margin(1e-12));
      REQUIRE(d.x() / d.norm() == Catch::Approx(0.8).margin(1e-12));
      REQUIRE(d.y() / d.norm() == Catch::Approx(0.6).margin(1e-12));
    }
    CHECK(p.height_des == Catch::Approx(0.30 - p.height_rate_down * dt).margin(1e-15));
  }

  SECTION("height clamps at the floor under persistent limiting") {
    PlannerState p;
    p.height_des = p.limits.height_min;
    const auto out = adapt_step_and_height(p, uniform_hips(0.30),
                                           uniform_vels(Vec3(5.0, 0.0, 0.0)), m, trot, dt);
    CHECK(out.limited);
    CHECK(p.height_des == p.limits.height_min);
  }

  SECTION("clamp radius uses each leg's own hip height") {
    PlannerState p;
    auto hips = uniform_hips(0.30);
    hips[2].z() = 0.10;  // crouched corner reaches much farther
    const auto vels = uniform_vels(Vec3(2.8, 0.0, 0.0));  // |d| = 0.35
    const auto out = adapt_step_and_height(p, hips, vels, m, trot, dt);
    CHECK(out.limited);
    const double tight = max_step_length(0.30, m.max_leg_extension, p.beta);
    CHECK(out.step[0].norm() == Catch::Approx(tight).margin(1e-12));
    CHECK(out.step[2].x() == Catch::Approx(0.35).margin(1e-15));
  }

  SECTION("clamped steps never exceed the per-leg radius") {
    PlannerState p;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uv(-6.0, 6.0);
    std::uniform_real_distribution<double> uz(0.15, 0.35);
    for (int trial = 0; trial < 200; ++trial) {
      std::array<Vec3, kNumLegs> hips;
      std::array<Vec3, kNumLegs> vels;
      for (int i = 0; i < kNumLegs; ++i) {
        hips[i] = Vec3(0.0, 0.0, uz(rng));
        vels[i] = Vec3(uv(rng), uv(rng), uv(rng));
      }
      const auto out = adapt_step_and_height(p, hips, vels, m, trot, dt);
      for (int i = 0; i < kNumLegs; ++i) {
        const double d_max = max_step_length(hips[i].z(), m.max_leg_extension, p.beta);
        REQUIRE(out.step[i].norm() <= d_max + 1e-12);
      }
    }
  }
}

TEST_CASE("swing trajectory interpolates with zero endpoint velocity") {
  const Vec3 start(0.2, 0.1, 0.0);
  const Vec3 target(0.35, 0.05, 0.0);
  const double h_z = 0.08;

  SECTION("endpoints and apex") {
    const SwingSample a = swing_trajectory(0.0, start, target, h_z);
    CHECK((a.pos - start).norm() < 1e-12);
    CHECK(a.vel.norm() < 1e-12);
    const SwingSample b = swing_trajectory(1.0, start, target, h_z);
    CHECK((b.pos - target).norm() < 1e-12);
    CHECK(b.vel.norm() < 1e-12);
    const SwingSample mid = swing_trajectory(0.5, start, target, h_z);
    CHECK(mid.pos.head<2>().isApprox(0.5 * (start + target).head<2>(), 1e-12));
    CHECK(mid.pos.z() == Catch::Approx(h_z).margin(1e-12));
    CHECK(mid.vel.z() == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("peak vertical rate at quarter phase") {
    const SwingSample q = swing_trajectory(0.25, start, target, h_z);
    CHECK(q.vel.z() == Catch::Approx(h_z * M_PI).margin(1e-12));
  }

  SECTION("vel and acc are phase derivatives of pos") {
    const double h = 1e-5;
    for (double ph : {0.13, 0.3, 0.52, 0.77, 0.9}) {
      const SwingSample lo = swing_trajectory(ph - h, start, target, h_z);
      const SwingSample hi = swing_trajectory(ph + h, start, target, h_z);
      const SwingSample at = swing_trajectory(ph, start, target, h_z);
      const Vec3 dv = (hi.pos - lo.pos) / (2.0 * h);
      const Vec3 da = (hi.vel - lo.vel) / (2.0 * h);
      REQUIRE((dv - at.vel).norm() < 1e-7);
      REQUIRE((da - at.acc).norm() < 1e-6);
    }
  }

  SECTION("phase clamps outside the unit interval") {
    const SwingSample lo = swing_trajectory(-0.2, start, target, h_z);
    CHECK((lo.pos - start).norm() < 1e-12);
    const SwingSample hi = swing_trajectory(1.3, start, target, h_z);
    CHECK((hi.pos - target).norm() < 1e-12);
  }

  SECTION("forward progress is monotone along the step direction") {
    double prev = -1.0;
    for (int k = 0; k <= 100; ++k) {
      const double ph = k / 100.0;
      const double along = (swing_trajectory(ph, start, target, h_z).pos - start)
                               .head<2>()
                               .dot((target - start).head<2>().normalized());
      REQUIRE(along >= prev - 1e-12);
      prev = along;
    }
  }
}
