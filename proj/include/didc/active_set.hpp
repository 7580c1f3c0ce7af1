#pragma once

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "didc/qp.hpp"

namespace didc {

struct LinearConstraints {
  MatX a;
  VecX b;
};

// Half-plane model of the cones: `facets` tangent planes per contact plus the
// normal force box, rows a_i' f <= b_i. The default pyramid circumscribes the
// cone (facet planes tangent along evenly spaced rays); the inscribed variant
// shrinks mu by cos(pi/facets) so every pyramid point is cone feasible.
inline LinearConstraints pyramid_constraints(const ConeQP& qp, int facets,
                                             bool inscribed = false) {
  if (facets < 4) {
    throw std::invalid_argument("pyramid_constraints: need at least 4 facets");
  }
  const int nc = qp.n_c();
  LinearConstraints lc;
  lc.a = MatX::Zero(nc * (facets + 2), qp.dim());
  lc.b = VecX::Zero(nc * (facets + 2));
  int row = 0;
  for (int i = 0; i < nc; ++i) {
    const double mu_eff = inscribed
                              ? qp.contacts[i].mu * std::cos(M_PI / facets)
                              : qp.contacts[i].mu;
    for (int k = 0; k < facets; ++k) {
      const double th = 2.0 * M_PI * k / facets;
      lc.a(row, 3 * i) = std::cos(th);
      lc.a(row, 3 * i + 1) = std::sin(th);
      lc.a(row, 3 * i + 2) = -mu_eff;
      ++row;
    }
    lc.a(row, 3 * i + 2) = -1.0;
    lc.b(row) = -qp.contacts[i].fz_min;
    ++row;
    lc.a(row, 3 * i + 2) = 1.0;
    lc.b(row) = qp.contacts[i].fz_max;
    ++row;
  }
  return lc;
}

// Dense primal active-set solve of the same objective over the linearized
// cones. Every step re-solves the equality-constrained subproblem on the
// working set, so the returned point is stationary on its active constraints
// to factorization accuracy. Least-index (Bland) selection on both the
// entering and the leaving constraint guards against cycling; constraints
// dependent on the working set never block because search directions stay in
// the working set's null space.
inline SolveReport pyramid_qp_solve(const ConeQP& qp, int facets = 4,
                                    bool inscribed = false,
                                    int max_pivots = 1000) {
  SolveReport rep;
  if (qp.dim() == 0) {
    rep.f_star.resize(0);
    rep.converged = true;
    rep.residual = qp.tau_b.norm();
    rep.objective = qp.r_const;
    return rep;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const LinearConstraints lc = pyramid_constraints(qp, facets, inscribed);
  const MatX hess = 2.0 * qp.q;
  const int n = qp.dim();
  const int m = static_cast<int>(lc.b.size());

  // Zero tangential force at mid-box normal force is always strictly
  // feasible in the facets and feasible in the box.
  VecX x = VecX::Zero(n);
  for (int i = 0; i < qp.n_c(); ++i) {
    x(3 * i + 2) = 0.5 * (qp.contacts[i].fz_min + qp.contacts[i].fz_max);
  }

  std::vector<int> work;
  VecX lambda;
  for (int pivot = 0; pivot < max_pivots && !rep.converged; ++pivot) {
    rep.iterations = pivot + 1;
    MatX aw(work.size(), n);
    for (size_t r = 0; r < work.size(); ++r) aw.row(r) = lc.a.row(work[r]);

    VecX d = VecX::Zero(n);
    const VecX grad = hess * x + qp.p;
    if (work.empty()) {
      d = -Eigen::LLT<MatX>(hess).solve(grad);
    } else {
      Eigen::FullPivLU<MatX> lu(aw);
      lu.setThreshold(1e-10);
      if (lu.dimensionOfKernel() > 0) {
        const MatX z = lu.kernel();
        const Eigen::LLT<MatX> red((z.transpose() * hess * z).eval());
        d = -z * red.solve(z.transpose() * grad);
      }
    }

    if (d.norm() < 1e-10 * (1.0 + x.norm())) {
      if (work.empty()) {
        rep.converged = true;
        break;
      }
      lambda = aw.transpose().colPivHouseholderQr().solve(-grad);
      int drop = -1;
      for (size_t r = 0; r < work.size(); ++r) {
        if (lambda(r) < -1e-9 && (drop < 0 || work[r] < work[drop])) {
          drop = static_cast<int>(r);
        }
      }
      if (drop < 0) {
        rep.converged = true;
        break;
      }
      work.erase(work.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int blocker = -1;
    for (int i = 0; i < m; ++i) {
      bool in_work = false;
      for (int w : work) in_work |= (w == i);
      if (in_work) continue;
      const double ad = lc.a.row(i).dot(d);
      if (ad <= 1e-12) continue;
      const double ratio = std::max(0.0, (lc.b(i) - lc.a.row(i).dot(x)) / ad);
      if (ratio < alpha - 1e-12 || (ratio < alpha + 1e-12 &&
                                    (blocker < 0 || i < blocker))) {
        alpha = std::min(alpha, ratio);
        blocker = i;
      }
    }
    x += alpha * d;
    if (alpha < 1.0 && blocker >= 0) {
      work.insert(std::lower_bound(work.begin(), work.end(), blocker),
                  blocker);
    }
  }
  if (!rep.converged) {
    throw std::runtime_error("pyramid_qp_solve: pivot limit exceeded");
  }

  rep.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  rep.f_star = x;
  rep.residual = report_residual(qp, x);
  rep.violation = qp.pyramid_violations(x).norm();
  rep.objective = qp.cost(x);
  return rep;
}

}  // namespace didc
