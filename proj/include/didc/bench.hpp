#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "didc/qp.hpp"
#include "didc/rbd.hpp"

namespace didc {

// One serializable solver benchmark problem. s1/w/v are kept beside the
// built QP so instances round-trip through the text format.
struct BenchInstance {
  std::uint64_t seed = 0;
  int n_c = 4;
  Vec6 s1 = Vec6::Ones();
  double w = 1e-2;
  double v = 1e-3;
  ConeQP qp;
};

// Draws a stance, a perturbed posture, and a gravity-dominant base wrench
// demand of the kind a trotting controller produces: full weight support
// plus moderate lateral force and moment corrections. Deterministic in
// (seed, n_c).
inline BenchInstance make_bench_instance(const RobotModel& model,
                                         std::uint64_t seed, int n_c) {
  if (n_c < 0 || n_c > kNumLegs) {
    throw std::invalid_argument("make_bench_instance: bad contact count");
  }
  std::mt19937_64 rng(seed * 6364136223846793005ULL + 1442695040888963407ULL +
                      static_cast<std::uint64_t>(n_c));
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  GeneralizedState s;
  s.q = VecX::Zero(kDof);
  s.v = VecX::Zero(kDof);
  s.q.segment<3>(0) = Vec3(0.0, 0.0, 0.30);
  s.q.segment<3>(3) = Vec3(uni(-0.1, 0.1), uni(-0.1, 0.1), uni(-0.5, 0.5));
  for (int leg = 0; leg < kNumLegs; ++leg) {
    s.q(kBaseDof + 3 * leg + 0) = uni(-0.15, 0.15);
    s.q(kBaseDof + 3 * leg + 1) = 0.8 + uni(-0.25, 0.25);
    s.q(kBaseDof + 3 * leg + 2) = -1.6 + uni(-0.25, 0.25);
  }

  ContactSet contacts;
  contacts.stance = {false, false, false, false};
  if (n_c == 2) {
    // Diagonal support pairs, as a trot produces.
    if (uni(0.0, 1.0) < 0.5) {
      contacts.stance[0] = contacts.stance[3] = true;
    } else {
      contacts.stance[1] = contacts.stance[2] = true;
    }
  } else {
    std::array<int, kNumLegs> order = {0, 1, 2, 3};
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < n_c; ++i) contacts.stance[order[i]] = true;
  }

  const double mg = model.total_mass() * kGravity;
  const double mu = 0.6;
  const MatX jab =
      contact_jacobian(model, s, contacts).leftCols<kBaseDof>();

  // Demand the wrench of a plausible support distribution: each stance leg
  // carries a share of the weight with a tangential pull well inside its
  // cone. The wrench noise on top leaves some instances mildly active; raw
  // wrench noise instead routinely asks for negative normal forces, which no
  // trotting controller does.
  BenchInstance inst;
  inst.seed = seed;
  inst.n_c = n_c;
  inst.s1 = default_s1();
  inst.w = kDefaultW;
  inst.v = kDefaultV;

  const std::vector<ContactLimits> limits(n_c, ContactLimits{mu, 0.0, 500.0});
  VecX f_prev = VecX::Zero(3 * n_c);
  for (int i = 0; i < n_c; ++i) f_prev(3 * i + 2) = mg / n_c;

  // Demand the wrench of a per-leg support distribution whose tangential
  // pulls range from slack to just past the cone boundary, plus small wrench
  // noise. A support phase binds its constraints shallowly: redraw demands
  // whose unconstrained optimum sits deeper outside the cones than a modest
  // fraction of the per-leg load. Without the depth cap, noise on an awkward
  // posture occasionally asks for violent redistributions no gait produces.
  // Prefer draws that bind at least one cone inside the cap, so the set
  // exercises the constraints; fall back to an interior draw otherwise.
  const double depth_cap = 0.002 * mg / std::max(n_c, 1);
  bool have_fallback = false;
  ConeQP fallback;
  for (int attempt = 0; attempt < 200; ++attempt) {
    VecX f_nom = VecX::Zero(3 * n_c);
    for (int i = 0; i < n_c; ++i) {
      const double fz = mg / std::max(n_c, 1) * (1.0 + uni(-0.25, 0.25));
      const double ft = uni(0.3, 1.05) * mu * fz;
      const double th = uni(0.0, 2.0 * M_PI);
      f_nom.segment<3>(3 * i) = Vec3(ft * std::cos(th), ft * std::sin(th), fz);
    }
    Vec6 tau_b = jab.transpose() * f_nom;
    tau_b += (Vec6() << uni(-0.01, 0.01) * mg, uni(-0.01, 0.01) * mg,
              uni(-0.01, 0.01) * mg, uni(-0.5, 0.5), uni(-0.5, 0.5),
              uni(-0.25, 0.25))
                 .finished();
    inst.qp = build_qp(jab, tau_b, inst.s1, inst.w, inst.v, limits, f_prev);
    const VecX f_unc = -0.5 * inst.qp.q.llt().solve(inst.qp.p);
    const double depth = (inst.qp.project(f_unc) - f_unc).norm();
    if (depth > depth_cap) continue;
    if (depth > 0.05 * depth_cap) {
      have_fallback = false;
      break;
    }
    if (!have_fallback) {
      have_fallback = true;
      fallback = inst.qp;
    }
  }
  if (have_fallback) inst.qp = fallback;
  return inst;
}

namespace detail {

inline void write_row(std::ostream& os, const char* key,
                      const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  os << key;
  for (int i = 0; i < row.size(); ++i) os << ' ' << row(i);
  os << '\n';
}

inline std::vector<double> expect_row(std::istream& is, const std::string& key,
                                      int count) {
  std::string line;
  do {
    if (!std::getline(is, line)) {
      throw std::runtime_error("qp instance: missing field " + key);
    }
  } while (line.empty() || line[0] == '#');
  std::istringstream ls(line);
  std::string name;
  ls >> name;
  if (name != key) {
    throw std::runtime_error("qp instance: expected " + key + ", got " + name);
  }
  std::vector<double> vals;
  double x;
  while (ls >> x) vals.push_back(x);
  if (count >= 0 && static_cast<int>(vals.size()) != count) {
    throw std::runtime_error("qp instance: bad arity for " + key);
  }
  return vals;
}

}  // namespace detail

inline void write_bench_instance(std::ostream& os, const BenchInstance& inst) {
  os << "# contact force qp instance\n";
  os.precision(17);
  os << "seed " << inst.seed << '\n';
  os << "n_c " << inst.n_c << '\n';
  detail::write_row(os, "s1", inst.s1.transpose());
  os << "w " << inst.w << '\n';
  os << "v " << inst.v << '\n';
  for (int i = 0; i < inst.n_c; ++i) {
    const ContactLimits& c = inst.qp.contacts[i];
    os << "contact " << c.mu << ' ' << c.fz_min << ' ' << c.fz_max << '\n';
  }
  detail::write_row(os, "tau_b", inst.qp.tau_b.transpose());
  detail::write_row(os, "f_prev", inst.qp.f_prev.transpose());
  for (int r = 0; r < inst.qp.jab.rows(); ++r) {
    detail::write_row(os, "jab", inst.qp.jab.row(r));
  }
}

inline BenchInstance read_bench_instance(std::istream& is) {
  BenchInstance inst;
  inst.seed = static_cast<std::uint64_t>(
      detail::expect_row(is, "seed", 1)[0]);
  inst.n_c = static_cast<int>(detail::expect_row(is, "n_c", 1)[0]);
  const auto s1 = detail::expect_row(is, "s1", 6);
  for (int i = 0; i < 6; ++i) inst.s1(i) = s1[i];
  inst.w = detail::expect_row(is, "w", 1)[0];
  inst.v = detail::expect_row(is, "v", 1)[0];
  std::vector<ContactLimits> limits;
  for (int i = 0; i < inst.n_c; ++i) {
    const auto c = detail::expect_row(is, "contact", 3);
    limits.push_back({c[0], c[1], c[2]});
  }
  const auto tb = detail::expect_row(is, "tau_b", 6);
  Vec6 tau_b;
  for (int i = 0; i < 6; ++i) tau_b(i) = tb[i];
  const auto fp = detail::expect_row(is, "f_prev", 3 * inst.n_c);
  VecX f_prev(3 * inst.n_c);
  for (int i = 0; i < 3 * inst.n_c; ++i) f_prev(i) = fp[i];
  MatX jab(3 * inst.n_c, kBaseDof);
  for (int r = 0; r < jab.rows(); ++r) {
    const auto row = detail::expect_row(is, "jab", kBaseDof);
    for (int c = 0; c < kBaseDof; ++c) jab(r, c) = row[c];
  }
  inst.qp = build_qp(jab, tau_b, inst.s1, inst.w, inst.v, limits, f_prev);
  return inst;
}

}  // namespace didc
