#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "didc/types.hpp"

namespace didc {

// Infinite-horizon LQR for the per-axis double integrator xdd = u with cost
// integral of q1 x^2 + q2 xd^2 + r u^2. The Riccati equation collapses to a
// closed form: kp = sqrt(q1/r), kd = sqrt(q2/r + 2 kp).
inline std::pair<double, double> lqr_gains(double q1, double q2, double r) {
  if (q1 < 0.0 || q2 < 0.0 || !(r > 0.0)) {
    throw std::invalid_argument("lqr_gains: need q1, q2 >= 0 and r > 0");
  }
  const double kp = std::sqrt(q1 / r);
  const double kd = std::sqrt(q2 / r + 2.0 * kp);
  return {kp, kd};
}

// Diagonal tracking gains for all 18 coordinates: the LQR pair everywhere,
// except the base x,y rows which run velocity-only damping because horizontal
// motion is commanded as a velocity, not servoed to a position.
inline Gains tracking_gains(double q1 = 100.0, double q2 = 1.0, double r = 1e-3,
                            double base_xy_kd = 10.4) {
  const auto [kp, kd] = lqr_gains(q1, q2, r);
  Gains g;
  g.kp.setConstant(kp);
  g.kd.setConstant(kd);
  g.kp(0) = 0.0;
  g.kp(1) = 0.0;
  g.kd(0) = base_xy_kd;
  g.kd(1) = base_xy_kd;
  return g;
}

}  // namespace didc
