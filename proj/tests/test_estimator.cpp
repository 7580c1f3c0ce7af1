#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "didc/estimator.hpp"
#include "didc/rbd.hpp"
#include "test_util.hpp"

using namespace didc;

namespace {

// Minimum-norm static (tau, F) with S^T tau + J_c^T F = eta, so the stacked
// equations of motion hold exactly at zero acceleration.
struct StaticSolution {
  Vec12 tau;
  VecX forces;  // stacked per stance leg
};

StaticSolution static_balance(const RobotModel& m, const GeneralizedState& s,
                              const ContactSet& c) {
  const MatX jct = contact_jacobian(m, s, c).transpose();
  MatX a(kDof, kNumJoints + jct.cols());
  a.setZero();
  a.block<kNumJoints, kNumJoints>(kBaseDof, 0).setIdentity();
  a.rightCols(jct.cols()) = jct;
  const VecX x = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(
      nonlinear_effects(m, s));
  StaticSolution out;
  out.tau = x.head<kNumJoints>();
  out.forces = x.tail(jct.cols());
  return out;
}

}  // namespace

TEST_CASE("acceleration filter differentiates polynomials and rejects noise") {
  const double dt = 2e-3;

  SECTION("derivative moment conditions hold by construction") {
    AccelerationFilter f(9, 2, dt);
    const auto& w = f.weights();
    CHECK(std::abs(w.sum()) < 1e-9 / dt);
    double first_moment = 0.0;
    for (int j = 0; j < 9; ++j) first_moment += w(j) * (-j * dt);
    CHECK(first_moment == Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("constant velocity gives zero acceleration") {
    AccelerationFilter f(9, 2, dt);
    const Vec18 v = Vec18::Constant(1.7);
    Vec18 out = Vec18::Zero();
    for (int k = 0; k < 30; ++k) out = f.push(v);
    CHECK(out.norm() < 1e-9);
  }

  SECTION("warm-up returns zero until the window fills") {
    AccelerationFilter f(9, 2, dt);
    for (int k = 0; k < 8; ++k) {
      const Vec18 out = f.push(Vec18::Constant(k * k));
      REQUIRE(out.norm() == 0.0);
    }
    CHECK(f.push(Vec18::Constant(81.0)).norm() > 0.0);
  }

  SECTION("linear and quadratic velocity are reproduced exactly") {
    AccelerationFilter f(9, 2, dt);
    const double c1 = -3.1;
    const double c2 = 7.7;
    Vec18 out = Vec18::Zero();
    for (int k = 0; k < 200; ++k) {
      const double t = k * dt;
      out = f.push(Vec18::Constant(0.4 + c1 * t + c2 * t * t));
      if (k >= 8) {
        const double expect = c1 + 2.0 * c2 * t;
        REQUIRE(out(0) == Catch::Approx(expect).margin(1e-8));
        REQUIRE((out.array() - out(0)).abs().maxCoeff() < 1e-12);
      }
    }
  }

  SECTION("white-noise variance is below the raw first difference") {
    AccelerationFilter f(9, 2, dt);
    std::mt19937 rng(11);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> sg;
    std::vector<double> fd;
    double prev = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double v = noise(rng);
      const Vec18 out = f.push(Vec18::Constant(v));
      if (k >= 9) {
        sg.push_back(out(0));
        fd.push_back((v - prev) / dt);
      }
      prev = v;
    }
    auto variance = [](const std::vector<double>& x) {
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= x.size();
      double var = 0.0;
      for (double v : x) var += (v - mean) * (v - mean);
      return var / x.size();
    };
    const double var_sg = variance(sg);
    const double var_fd = variance(fd);
    INFO("variance ratio " << var_sg / var_fd);
    CHECK(var_sg < 0.5 * var_fd);
  }

  SECTION("constructor rejects degenerate configurations") {
    CHECK_THROWS_AS(AccelerationFilter(1, 1, dt), std::invalid_argument);
    CHECK_THROWS_AS(AccelerationFilter(9, 0, dt), std::invalid_argument);
    CHECK_THROWS_AS(AccelerationFilter(5, 5, dt), std::invalid_argument);
    CHECK_THROWS_AS(AccelerationFilter(9, 2, 0.0), std::invalid_argument);
  }
}

TEST_CASE("force estimation inverts the equations of motion") {
  const RobotModel& m = testutil::model();

  SECTION("dynamically consistent data reproduces the applied forces") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> uf(-40.0, 40.0);
    std::uniform_real_distribution<double> ut(-8.0, 8.0);
    for (int trial = 0; trial < 50; ++trial) {
      const GeneralizedState s = testutil::random_state(rng, 0.5);
      ContactSet c;
      int n_c = 0;
      while (n_c < 2) {  // keep J_c^T full column rank with at least two legs
        for (int i = 0; i < kNumLegs; ++i) c.stance[i] = rng() % 2 == 0;
        n_c = c.count();
      }
      std::array<Vec3, kNumLegs> f_true{};
      for (auto& f : f_true) f.setZero();
      for (int leg : c.active()) f_true[leg] = Vec3(uf(rng), uf(rng), uf(rng) + 60.0);
      Vec12 tau;
      for (int i = 0; i < kNumJoints; ++i) tau(i) = ut(rng);
      const Vec18 qdd = forward_dynamics(m, s, tau, f_true);
      const auto f_hat = estimate_contact_forces(m, s, tau, qdd, c);
      for (int i = 0; i < kNumLegs; ++i) {
        REQUIRE((f_hat[i] - f_true[i]).norm() < 1e-6 * (1.0 + f_true[i].norm()));
        if (!c.stance[i]) REQUIRE(f_hat[i].norm() == 0.0);
      }
    }
  }

  SECTION("standing statics: estimated normal forces carry the weight") {
    const GeneralizedState s = testutil::standing_state();
    const ContactSet c = ContactSet::all();
    const StaticSolution ref = static_balance(m, s, c);
    const auto f_hat = estimate_contact_forces(m, s, ref.tau, Vec18::Zero(), c);
    double fz = 0.0;
    int row = 0;
    for (int leg : c.active()) {
      REQUIRE((f_hat[leg] - ref.forces.segment<3>(row)).norm() < 1e-8);
      fz += f_hat[leg].z();
      row += 3;
    }
    CHECK(fz == Catch::Approx(m.total_mass() * kGravity).margin(1e-6));
  }

  SECTION("no candidates gives all zeros") {
    const GeneralizedState s = testutil::standing_state();
    const auto f_hat = estimate_contact_forces(m, s, Vec12::Ones(), Vec18::Zero(), ContactSet{});
    for (const auto& f : f_hat) REQUIRE(f.norm() == 0.0);
  }
}

TEST_CASE("contact probability fuses force, height and schedule evidence") {
  SECTION("strong agreement saturates the belief") {
    CHECK(contact_probability(60.0, 0.0, true) > 0.9);
    CHECK(contact_probability(0.0, 0.05, false) < 0.1);
  }

  SECTION("balanced evidence averages the complementary priors") {
    const double with_stance = contact_probability(10.0, 0.01, true);
    const double with_swing = contact_probability(10.0, 0.01, false);
    CHECK(0.5 * (with_stance + with_swing) == Catch::Approx(0.5).margin(1e-12));
    CHECK(with_stance > 0.5);
    CHECK(with_swing < 0.5);
  }

  SECTION("monotone in force, antitone in height") {
    double prev = 0.0;
    for (double fz = 0.0; fz <= 60.0; fz += 5.0) {
      const double p = contact_probability(fz, 0.01, true);
      REQUIRE(p > prev);
      prev = p;
    }
    prev = 1.0;
    for (double h = 0.0; h <= 0.1; h += 0.01) {
      const double p = contact_probability(30.0, h, true);
      REQUIRE(p < prev);
      prev = p;
    }
  }

  SECTION("bounded in [0, 1] over extreme inputs") {
    for (double fz : {-1e3, 0.0, 1e6}) {
      for (double h : {-0.5, 0.0, 10.0}) {
        for (bool sched : {false, true}) {
          const double p = contact_probability(fz, h, sched);
          REQUIRE(p >= 0.0);
          REQUIRE(p <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("hysteresis holds the state inside the dead band") {
  SECTION("threshold table") {
    CHECK(hysteresis_contact_state(0.7, false));
    CHECK(hysteresis_contact_state(0.6, false));  // boundary flips on
    CHECK_FALSE(hysteresis_contact_state(0.3, true));
    CHECK_FALSE(hysteresis_contact_state(0.4, true));  // boundary flips off
    CHECK(hysteresis_contact_state(0.5, true));
    CHECK_FALSE(hysteresis_contact_state(0.5, false));
  }

  SECTION("no flip while the probability stays between thresholds") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> band(0.401, 0.599);
    for (bool init : {false, true}) {
      bool state = init;
      for (int k = 0; k < 1000; ++k) {
        state = hysteresis_contact_state(band(rng), state);
        REQUIRE(state == init);
      }
    }
  }
}

TEST_CASE("contact estimator ties the pipeline together") {
  const RobotModel& m = testutil::model();

  SECTION("standing with consistent torques believes all feet down") {
    const GeneralizedState s = testutil::standing_state();
    const StaticSolution ref = static_balance(m, s, ContactSet::all());
    ContactEstimator est(m);
    const std::array<bool, kNumLegs> sched = {true, true, true, true};
    ContactBelief b;
    for (int k = 0; k < 20; ++k) b = est.update(s, ref.tau, sched);
    double fz = 0.0;
    for (int i = 0; i < kNumLegs; ++i) {
      REQUIRE(b.probability[i] > 0.9);
      REQUIRE(b.state[i]);
      fz += b.force[i].z();
    }
    CHECK(fz == Catch::Approx(m.total_mass() * kGravity).margin(1e-6));
  }

  SECTION("a lifted, unscheduled leg drops out of the belief") {
    GeneralizedState s = testutil::standing_state();
    s.q(6) = 0.3;    // FL abduction out
    s.q(7) = 1.2;    // FL thigh swung up
    s.q(8) = -0.8;   // FL knee folded
    const double fl_height = forward_kinematics(m, s).foot[0].z();
    REQUIRE(fl_height > 0.04);  // clear of the candidate band
    ContactEstimator est(m);
    const std::array<bool, kNumLegs> sched = {false, true, true, true};
    ContactBelief b;
    for (int k = 0; k < 5; ++k) b = est.update(s, Vec12::Zero(), sched);
    CHECK(b.force[0].norm() == 0.0);
    CHECK(b.probability[0] < 0.1);
    CHECK_FALSE(b.state[0]);
  }
}
