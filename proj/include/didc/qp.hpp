#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <vector>

#include "didc/cone.hpp"
#include "didc/types.hpp"

namespace didc {

struct ContactLimits {
  double mu = 0.6;
  double fz_min = 0.0;
  double fz_max = 500.0;
};

// Weights used throughout the stack unless a caller overrides them.
inline Vec6 default_s1() { return (Vec6() << 1, 1, 2, 20, 20, 5).finished(); }
constexpr double kDefaultW = 1e-2;
constexpr double kDefaultV = 1e-3;

// Contact force QP in standard form, cost(f) = f'Qf + p'f + r_const, subject
// to one friction cone and normal force box per contact. jab and tau_b are
// kept alongside so reports can state the base wrench residual.
struct ConeQP {
  MatX q;
  VecX p;
  double r_const = 0.0;
  std::vector<ContactLimits> contacts;
  VecX f_prev;
  MatX jab;
  Vec6 tau_b = Vec6::Zero();

  int n_c() const { return static_cast<int>(contacts.size()); }
  int dim() const { return 3 * n_c(); }

  double cost(const VecX& f) const { return f.dot(q * f) + p.dot(f) + r_const; }

  VecX project(const VecX& f) const {
    VecX out(f.size());
    for (int i = 0; i < n_c(); ++i) {
      out.segment<3>(3 * i) =
          project_cone(f.segment<3>(3 * i), contacts[i].mu, contacts[i].fz_min,
                       contacts[i].fz_max);
    }
    return out;
  }

  VecX cone_violations(const VecX& f) const {
    VecX v(n_c());
    for (int i = 0; i < n_c(); ++i) {
      v(i) = cone_violation(f.segment<3>(3 * i), contacts[i].mu);
    }
    return v;
  }

  VecX pyramid_violations(const VecX& f) const {
    VecX v(n_c());
    for (int i = 0; i < n_c(); ++i) {
      v(i) = pyramid_violation(f.segment<3>(3 * i), contacts[i].mu);
    }
    return v;
  }
};

struct SolveReport {
  VecX f_star;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  double violation = 0.0;
  double solve_time = 0.0;
  double objective = 0.0;
};

// Standard form of the tracking cost
//   (J_ab^T f - tau_b)' S1 (J_ab^T f - tau_b) + f' W f + (f - f_prev)' V (f - f_prev)
// with jab of shape 3n_c x 6. Weights must be nonnegative; SPD-ness of Q is
// checked where it is factored, since W = V = 0 is legitimate for analysis.
inline ConeQP build_qp(const MatX& jab, const Vec6& tau_b, const Vec6& s1,
                       const VecX& w, const VecX& v,
                       const std::vector<ContactLimits>& contacts,
                       const VecX& f_prev) {
  const int n = static_cast<int>(3 * contacts.size());
  if (jab.rows() != n || jab.cols() != 6 || w.size() != n || v.size() != n ||
      f_prev.size() != n) {
    throw std::invalid_argument("build_qp: dimension mismatch");
  }
  if ((s1.array() < 0.0).any() || (w.array() < 0.0).any() ||
      (v.array() < 0.0).any()) {
    throw std::invalid_argument("build_qp: weights must be nonnegative");
  }
  ConeQP qp;
  qp.q = jab * s1.asDiagonal() * jab.transpose();
  qp.q.diagonal() += w + v;
  qp.q = (0.5 * (qp.q + qp.q.transpose())).eval();
  qp.p = -2.0 * (jab * (s1.asDiagonal() * tau_b) + v.asDiagonal() * f_prev);
  qp.r_const =
      tau_b.dot(s1.asDiagonal() * tau_b) + f_prev.dot(v.asDiagonal() * f_prev);
  qp.contacts = contacts;
  qp.f_prev = f_prev;
  qp.jab = jab;
  qp.tau_b = tau_b;
  return qp;
}

inline ConeQP build_qp(const MatX& jab, const Vec6& tau_b, const Vec6& s1,
                       double w, double v,
                       const std::vector<ContactLimits>& contacts,
                       const VecX& f_prev) {
  const int n = static_cast<int>(3 * contacts.size());
  return build_qp(jab, tau_b, s1, VecX::Constant(n, w), VecX::Constant(n, v),
                  contacts, f_prev);
}

inline double report_residual(const ConeQP& qp, const VecX& f) {
  if (qp.jab.rows() != qp.dim() || qp.jab.cols() != 6) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return wrench_residual(qp.jab, f, qp.tau_b);
}

}  // namespace didc
