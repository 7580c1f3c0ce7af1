#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "didc/types.hpp"

namespace didc {

// Euclidean projection onto the friction cone intersected with the normal
// force box [fz_min, fz_max]. Exact for fz_min = 0. The membership test
// carries a few ulp of slack so that reprojecting an output returns it
// unchanged, bit for bit.
inline Vec3 project_cone(const Vec3& f, double mu, double fz_min,
                         double fz_max) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double zc = std::clamp(f.z(), fz_min, fz_max);
  const double ft = f.head<2>().norm();
  if (ft <= mu * zc * (1.0 + 8.0 * eps) + 8.0 * eps) {
    return {f.x(), f.y(), zc};
  }
  if (mu * ft + f.z() <= 0.0) {
    // Inside the polar cone: the nearest feasible point is the apex.
    return Vec3::Zero();
  }
  if (ft == 0.0) {
    return {0.0, 0.0, zc};
  }
  const double zp =
      std::clamp((mu * ft + f.z()) / (mu * mu + 1.0), fz_min, fz_max);
  const double scale = mu * zp / ft;
  return {scale * f.x(), scale * f.y(), zp};
}

// Signed cone margin, zero when feasible: min{mu f^z - ||f^xy||, 0}.
inline double cone_violation(const Vec3& f, double mu) {
  return std::min(mu * f.z() - f.head<2>().norm(), 0.0);
}

// Same for the four-sided pyramid |f^x| <= mu f^z, |f^y| <= mu f^z.
inline double pyramid_violation(const Vec3& f, double mu) {
  const double a = mu * f.z();
  return std::min({a - f.x(), a + f.x(), a - f.y(), a + f.y(), 0.0});
}

// Base wrench residual ||J_ab^T f - tau_b||.
inline double wrench_residual(const MatX& jab, const VecX& f,
                              const Vec6& tau_b) {
  if (f.size() == 0) return tau_b.norm();
  return (jab.transpose() * f - tau_b).norm();
}

}  // namespace didc
