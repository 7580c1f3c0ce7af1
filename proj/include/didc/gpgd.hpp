#pragma once

#include <chrono>
#include <stdexcept>

#include "didc/qp.hpp"

namespace didc {

// Projected gradient descent with the exact Newton step: each iterate jumps
// to the unconstrained minimizer (the Hessian 2Q is constant, factored once)
// and is then projected one cone at a time. Terminates when the projected
// step moves less than tol.
inline SolveReport gpgd_solve(const ConeQP& qp, const VecX& f_init,
                              int max_iters = 100, double tol = 1e-2) {
  SolveReport rep;
  if (qp.dim() == 0) {
    rep.f_star.resize(0);
    rep.converged = true;
    rep.residual = qp.tau_b.norm();
    rep.objective = qp.r_const;
    return rep;
  }
  if (f_init.size() != qp.dim()) {
    throw std::invalid_argument("gpgd_solve: warm start dimension mismatch");
  }
  const auto t0 = std::chrono::steady_clock::now();
  Eigen::LLT<MatX> llt(2.0 * qp.q);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("gpgd_solve: hessian is not positive definite");
  }
  VecX f = f_init;
  for (int it = 1; it <= max_iters; ++it) {
    const VecX grad = 2.0 * (qp.q * f) + qp.p;
    const VecX fp = qp.project(f - llt.solve(grad));
    const double step = (fp - f).norm();
    f = fp;
    rep.iterations = it;
    if (step < tol) {
      rep.converged = true;
      break;
    }
  }
  rep.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  rep.f_star = f;
  rep.residual = report_residual(qp, f);
  rep.violation = qp.cone_violations(f).norm();
  rep.objective = qp.cost(f);
  return rep;
}

}  // namespace didc
