#pragma once

// Contact estimation from measured joint torques: least-squares foot forces
// through the stacked contact jacobian, a smoothing-differentiation filter for
// generalized acceleration, bounded evidence fusion into a per-leg contact
// probability, and hysteresis thresholding of the binary contact state.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "didc/controller.hpp"
#include "didc/model.hpp"
#include "didc/rbd.hpp"
#include "didc/types.hpp"

namespace didc {

struct ContactBelief {
  std::array<double, kNumLegs> probability = {1.0, 1.0, 1.0, 1.0};
  std::array<bool, kNumLegs> state = {true, true, true, true};  // standing start
  // Eigen members are not zeroed by value-initialization; spell it out.
  std::array<Vec3, kNumLegs> force = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
};

// Least-squares derivative at the newest sample of a sliding window: fit a
// polynomial to the last `window` samples and differentiate it at the end
// point. Exact for velocity histories of polynomial degree <= order; returns
// zero until the window has filled.
class AccelerationFilter {
 public:
  AccelerationFilter(int window = 9, int order = 2, double dt = 2e-3) : window_(window) {
    if (window < 2 || order < 1 || order >= window || !(dt > 0.0)) {
      throw std::invalid_argument("AccelerationFilter: need window > order >= 1 and dt > 0");
    }
    // Sample j lives at t = -j * dt (j = 0 newest). The derivative at t = 0 is
    // the linear coefficient of the least-squares fit.
    MatX a(window, order + 1);
    for (int j = 0; j < window; ++j) {
      double p = 1.0;
      for (int m = 0; m <= order; ++m) {
        a(j, m) = p;
        p *= -static_cast<double>(j);
      }
    }
    weights_ = pinv(a).row(1) / dt;
    hist_.reserve(window);
  }

  Vec18 push(const Vec18& velocity) {
    if (static_cast<int>(hist_.size()) < window_) {
      hist_.push_back(velocity);
      if (static_cast<int>(hist_.size()) < window_) return Vec18::Zero();
    } else {
      hist_[head_] = velocity;
      head_ = (head_ + 1) % window_;
    }
    Vec18 acc = Vec18::Zero();
    for (int j = 0; j < window_; ++j) {
      // j steps back from the newest sample.
      const int idx = (head_ + window_ - 1 - j) % window_;
      acc += weights_(j) * hist_[idx];
    }
    return acc;
  }

  void reset() {
    hist_.clear();
    head_ = 0;
  }

  const Eigen::RowVectorXd& weights() const { return weights_; }

 private:
  int window_;
  int head_ = 0;
  Eigen::RowVectorXd weights_;
  std::vector<Vec18> hist_;
};

// Foot forces explaining the torque measurement through the equations of
// motion: the least-squares solution of J_c^T F = S^T tau - M qdd - eta over
// the candidate legs, with the conventional sign flip. Non-candidates get
// zero. Exact whenever the data is dynamically consistent and J_c^T has full
// column rank.
inline std::array<Vec3, kNumLegs> estimate_contact_forces(const RobotModel& m,
                                                          const GeneralizedState& s,
                                                          const Vec12& tau, const Vec18& qdd,
                                                          const ContactSet& candidates) {
  std::array<Vec3, kNumLegs> out{};
  for (auto& f : out) f.setZero();
  if (candidates.count() == 0) return out;
  Vec18 rhs = -nonlinear_effects(m, s);
  rhs.segment<kNumJoints>(kBaseDof) += tau;
  rhs -= mass_matrix(m, s) * qdd;
  const MatX jct = contact_jacobian(m, s, candidates).transpose();
  const VecX f = -(pinv(jct) * rhs);
  int row = 0;
  for (int leg : candidates.active()) {
    out[leg] = f.segment<3>(row);
    row += 3;
  }
  return out;
}

struct ProbabilityConfig {
  double force_center = 10.0;    // N, logistic midpoint on the normal force
  double force_scale = 5.0;      // N
  double height_center = 0.01;   // m, logistic midpoint on foot height
  double height_scale = 0.005;   // m
  double schedule_stance = 0.9;  // prior while the gait schedules contact
  double schedule_swing = 0.1;
  double w_force = 1.0;
  double w_height = 1.0;
  double w_schedule = 1.0;
};

// Weighted average of three bounded evidence terms: normal force (rising
// logistic), foot height (falling logistic), and the gait schedule prior.
inline double contact_probability(double normal_force, double foot_height, bool scheduled_stance,
                                  const ProbabilityConfig& c = {}) {
  const double pf = 1.0 / (1.0 + std::exp(-(normal_force - c.force_center) / c.force_scale));
  const double ph = 1.0 / (1.0 + std::exp((foot_height - c.height_center) / c.height_scale));
  const double ps = scheduled_stance ? c.schedule_stance : c.schedule_swing;
  return (c.w_force * pf + c.w_height * ph + c.w_schedule * ps) /
         (c.w_force + c.w_height + c.w_schedule);
}

// Dead band between the thresholds holds the previous state.
inline bool hysteresis_contact_state(double probability, bool previous, double on = 0.6,
                                     double off = 0.4) {
  if (probability >= on) return true;
  if (probability <= off) return false;
  return previous;
}

struct EstimatorConfig {
  int filter_window = 9;
  int filter_order = 2;
  double control_dt = 2e-3;         // s
  double candidate_height = 0.02;   // m, ground proximity for force candidates
  ProbabilityConfig probability;
  double on_threshold = 0.6;
  double off_threshold = 0.4;
};

// Per-robot sequential contact estimator, advanced once per control tick.
class ContactEstimator {
 public:
  explicit ContactEstimator(const RobotModel& m, EstimatorConfig cfg = {})
      : model_(&m),
        cfg_(cfg),
        filter_(cfg.filter_window, cfg.filter_order, cfg.control_dt) {}

  const ContactBelief& update(const GeneralizedState& s, const Vec12& tau,
                              const std::array<bool, kNumLegs>& scheduled_stance) {
    const Vec18 qdd = filter_.push(s.v);
    const Kinematics k = forward_kinematics(*model_, s);
    ContactSet candidates;
    for (int i = 0; i < kNumLegs; ++i) {
      candidates.stance[i] = scheduled_stance[i] || k.foot[i].z() < cfg_.candidate_height;
    }
    belief_.force = estimate_contact_forces(*model_, s, tau, qdd, candidates);
    for (int i = 0; i < kNumLegs; ++i) {
      belief_.probability[i] = contact_probability(belief_.force[i].z(), k.foot[i].z(),
                                                   scheduled_stance[i], cfg_.probability);
      belief_.state[i] = hysteresis_contact_state(belief_.probability[i], belief_.state[i],
                                                  cfg_.on_threshold, cfg_.off_threshold);
    }
    return belief_;
  }

  const ContactBelief& belief() const { return belief_; }

  void reset() {
    filter_.reset();
    belief_ = ContactBelief{};
  }

 private:
  const RobotModel* model_;
  EstimatorConfig cfg_;
  AccelerationFilter filter_;
  ContactBelief belief_;
};

}  // namespace didc
