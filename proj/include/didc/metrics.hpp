#pragma once

// Per-tick run records and their aggregates: foot slip (contact-gated),
// absolute mechanical power, orientation error, solver statistics, and
// velocity tracking error, with a deterministic CSV serialization.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "didc/types.hpp"

namespace didc {

struct TickRecord {
  double t = 0.0;
  std::array<double, kNumLegs> slip_speed{};  // tangential foot speed, m/s
  std::array<bool, kNumLegs> slip_gate{};     // believed in contact this tick
  double roll_err = 0.0;                      // |log(R_des R^T)| components, rad
  double pitch_err = 0.0;
  double power = 0.0;  // W
  double residual = 0.0;
  double violation = 0.0;
  double solve_time = 0.0;
  int iterations = 0;
  double vel_err = 0.0;  // m/s, horizontal base velocity tracking error
  double latency_ms = 0.0;
};

// Regeneration does not offset consumption: every joint contributes the
// absolute value of its mechanical power.
inline double absolute_power(const Vec12& tau, const Vec12& qd) {
  double p = 0.0;
  for (int i = 0; i < kNumJoints; ++i) p += std::abs(tau(i) * qd(i));
  return p;
}

struct RunMetrics {
  int ticks = 0;
  int slip_samples = 0;  // contact-gated leg samples pooled across legs
  double mean_slip = 0.0;
  double std_slip = 0.0;
  std::array<double, kNumLegs> mean_slip_leg{};
  double mean_power = 0.0;
  double std_power = 0.0;
  double mean_roll = 0.0;
  double std_roll = 0.0;
  double mean_pitch = 0.0;
  double std_pitch = 0.0;
  double mean_orient = 0.0;  // per-tick hypot(roll, pitch) error
  double std_orient = 0.0;
  double mean_residual = 0.0;
  double mean_violation = 0.0;
  double mean_iterations = 0.0;
  double mean_solve_time = 0.0;
  double mean_vel_err = 0.0;
  double std_vel_err = 0.0;
  bool fell = false;
  double fall_time = -1.0;
};

namespace detail {

struct Welford {
  int n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double std_dev() const { return n > 0 ? std::sqrt(m2 / n) : 0.0; }
};

}  // namespace detail

inline RunMetrics aggregate(const std::vector<TickRecord>& records) {
  RunMetrics out;
  out.ticks = static_cast<int>(records.size());
  detail::Welford slip, power, roll, pitch, orient, vel;
  std::array<detail::Welford, kNumLegs> slip_leg;
  double residual = 0.0, violation = 0.0, iters = 0.0, time = 0.0;
  for (const auto& r : records) {
    for (int i = 0; i < kNumLegs; ++i) {
      if (!r.slip_gate[i]) continue;
      slip.add(r.slip_speed[i]);
      slip_leg[i].add(r.slip_speed[i]);
    }
    power.add(r.power);
    roll.add(std::abs(r.roll_err));
    pitch.add(std::abs(r.pitch_err));
    orient.add(std::hypot(r.roll_err, r.pitch_err));
    vel.add(r.vel_err);
    residual += r.residual;
    violation += r.violation;
    iters += r.iterations;
    time += r.solve_time;
  }
  out.slip_samples = slip.n;
  out.mean_slip = slip.mean;
  out.std_slip = slip.std_dev();
  for (int i = 0; i < kNumLegs; ++i) out.mean_slip_leg[i] = slip_leg[i].mean;
  out.mean_power = power.mean;
  out.std_power = power.std_dev();
  out.mean_roll = roll.mean;
  out.std_roll = roll.std_dev();
  out.mean_pitch = pitch.mean;
  out.std_pitch = pitch.std_dev();
  out.mean_orient = orient.mean;
  out.std_orient = orient.std_dev();
  if (out.ticks > 0) {
    out.mean_residual = residual / out.ticks;
    out.mean_violation = violation / out.ticks;
    out.mean_iterations = iters / out.ticks;
    out.mean_solve_time = time / out.ticks;
  }
  out.mean_vel_err = vel.mean;
  out.std_vel_err = vel.std_dev();
  return out;
}

inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

// One row per control tick. The header carries the scenario hash and seed so
// a byte-level diff certifies a reproduced run.
inline void write_tick_csv(const std::string& path, std::uint64_t scenario_hash,
                           std::uint64_t seed, const std::vector<TickRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("metrics: cannot open " + path);
  f << "# scenario_hash=" << scenario_hash << " seed=" << seed << "\n";
  f << "t,slip_fl,slip_fr,slip_rl,slip_rr,gate_fl,gate_fr,gate_rl,gate_rr,"
       "roll_err,pitch_err,power,residual,violation,solve_time,iterations,"
       "vel_err,latency_ms\n";
  for (const auto& r : records) {
    f << detail::fmt(r.t);
    for (int i = 0; i < kNumLegs; ++i) f << ',' << detail::fmt(r.slip_speed[i]);
    for (int i = 0; i < kNumLegs; ++i) f << ',' << (r.slip_gate[i] ? 1 : 0);
    f << ',' << detail::fmt(r.roll_err) << ',' << detail::fmt(r.pitch_err) << ','
      << detail::fmt(r.power) << ',' << detail::fmt(r.residual) << ','
      << detail::fmt(r.violation) << ',' << detail::fmt(r.solve_time) << ','
      << r.iterations << ',' << detail::fmt(r.vel_err) << ',' << detail::fmt(r.latency_ms)
      << "\n";
  }
}

inline std::string summary_text(const RunMetrics& m) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "ticks " << m.ticks << "\n"
     << "slip mean " << m.mean_slip << " std " << m.std_slip << " samples " << m.slip_samples
     << "\n"
     << "power mean " << m.mean_power << " std " << m.std_power << "\n"
     << "roll mean " << m.mean_roll << " std " << m.std_roll << "\n"
     << "pitch mean " << m.mean_pitch << " std " << m.std_pitch << "\n"
     << "orient mean " << m.mean_orient << " std " << m.std_orient << "\n"
     << "vel_err mean " << m.mean_vel_err << " std " << m.std_vel_err << "\n"
     << "solver residual " << m.mean_residual << " violation " << m.mean_violation
     << " iters " << m.mean_iterations << " time " << m.mean_solve_time << "\n"
     << "fell " << (m.fell ? 1 : 0) << " fall_time " << m.fall_time << "\n";
  return os.str();
}

}  // namespace didc
