#pragma once

// Scenario files: one JSON document describes a complete closed-loop run —
// model, world, gait, controller and solver selection, gains, QP weights,
// planner shaping, velocity command schedule, seed, and output directory.
// Loading validates referenced files and parameter ranges up front so a bad
// scenario fails before any simulation state exists.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "didc/controller.hpp"
#include "didc/lqr.hpp"
#include "didc/metrics.hpp"
#include "didc/model.hpp"
#include "didc/planner.hpp"
#include "didc/sim.hpp"

namespace didc {

enum class ControllerKind { kDidc, kNspidc, kBalance };
enum class SolverKind { kGpgd, kPyramid };

inline std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::kDidc: return "didc";
    case ControllerKind::kNspidc: return "nspidc";
    case ControllerKind::kBalance: return "bc";
  }
  return "?";
}

struct SolverConfig {
  SolverKind kind = SolverKind::kGpgd;
  int facets = 4;  // pyramid linearization only
  int max_iters = 100;
  double tol = 1e-2;
};

// Gains are derived from the per-DOF LQR weights; the base x,y rows are then
// replaced by the configured pair (velocity-only damping for trotting, the
// full LQR pair for station keeping). gain_scale multiplies every kp and kd
// row, the knob the projection baseline needs softened.
struct GainSpec {
  double q1 = 100.0;
  double q2 = 1.0;
  double r = 1e-3;
  double base_xy_kp = 0.0;
  double base_xy_kd = 10.4;
  double gain_scale = 1.0;
};

struct ScheduleRow {
  double t = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double yaw_rate = 0.0;
};

struct PlannerSpec {
  double k_b = 5.0;
  double k_theta = 5.0;
  double beta = 0.9;
  double height_min = 0.18;
  double height_max = 0.30;
  double omega_max = 2.0;
  double alpha_max = 4.0;
  double height_rate_down = 0.10;
  double height_rate_up = 0.05;
};

struct Scenario {
  std::string name;
  std::string model_path;
  WorldConfig world;
  GaitConfig gait;
  ControllerKind controller = ControllerKind::kDidc;
  SolverConfig solver;
  GainSpec gains;
  QpConfig qp;
  PlannerSpec planner;
  std::vector<ScheduleRow> schedule;
  double duration = 10.0;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::uint64_t hash = 0;  // FNV-1a of the file bytes, stamped into outputs

  // gain_scale applied to the projection baseline when the comparison command
  // clones this scenario across controllers; recorded here so the scenario
  // file documents the softened set.
  double nspidc_gain_scale = 1.0;
};

inline Gains scenario_gains(const GainSpec& g) {
  Gains out = tracking_gains(g.q1, g.q2, g.r);
  out.kp(0) = out.kp(1) = g.base_xy_kp;
  out.kd(0) = out.kd(1) = g.base_xy_kd;
  out.kp *= g.gain_scale;
  out.kd *= g.gain_scale;
  return out;
}

// Piecewise-constant command lookup: the last row at or before t; zero
// command before the first row.
inline VelocityCommand command_at(const std::vector<ScheduleRow>& schedule, double t) {
  VelocityCommand cmd;
  for (const auto& row : schedule) {
    if (row.t > t) break;
    cmd.linear = Eigen::Vector2d(row.vx, row.vy);
    cmd.yaw_rate = row.yaw_rate;
  }
  return cmd;
}

namespace detail {

inline std::string dir_of(const std::string& path) {
  const auto pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

inline bool file_exists(const std::string& path) {
  return std::ifstream(path).good();
}

// Model references resolve against the scenario's own directory first, then
// the installed data directory, so scenario files stay relocatable.
inline std::string resolve_model_path(const std::string& ref, const std::string& scenario_dir) {
  if (!ref.empty() && ref.front() == '/') return ref;
  const std::string local = scenario_dir + "/" + ref;
  if (file_exists(local)) return local;
  const std::string data = std::string(DIDC_DATA_DIR) + "/" + ref;
  if (file_exists(data)) return data;
  throw std::invalid_argument("scenario: model file not found: " + ref);
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j, const std::string& scenario_dir) {
  Scenario sc;
  try {
    sc.name = j.at("name").get<std::string>();
    sc.model_path = detail::resolve_model_path(j.at("model").get<std::string>(), scenario_dir);
    sc.duration = j.value("duration_s", 10.0);
    sc.seed = j.value("seed", std::uint64_t{0});
    sc.output_dir = j.value("output_dir", std::string("."));

    if (j.contains("world")) {
      const auto& w = j["world"];
      sc.world.gravity = w.value("gravity", sc.world.gravity);
      sc.world.ground_height = w.value("ground_height", sc.world.ground_height);
      sc.world.mu = w.value("mu", sc.world.mu);
      sc.world.k_n = w.value("k_n", sc.world.k_n);
      sc.world.d_n = w.value("d_n", sc.world.d_n);
      sc.world.v_reg = w.value("v_reg", sc.world.v_reg);
      sc.world.dt = w.value("dt", sc.world.dt);
      sc.world.control_period = w.value("control_period", sc.world.control_period);
      if (w.contains("latency_ms")) {
        sc.world.latency.clear();
        for (const auto& bin : w["latency_ms"]) {
          sc.world.latency.push_back({bin.at(0).get<double>(), bin.at(1).get<double>()});
        }
      }
    }

    if (j.contains("gait")) {
      const auto& g = j["gait"];
      const std::string type = g.value("type", std::string("trot"));
      if (type == "trot") {
        sc.gait = GaitConfig::trot();
      } else if (type == "stand") {
        sc.gait = GaitConfig::stand();
      } else {
        throw std::invalid_argument("scenario: unknown gait type '" + type + "'");
      }
      sc.gait.period = g.value("period", sc.gait.period);
      if (g.contains("duty")) sc.gait.duty.fill(g["duty"].get<double>());
      sc.gait.step_height = g.value("step_height", sc.gait.step_height);
    }

    if (j.contains("controller")) {
      const auto& c = j["controller"];
      const std::string type = c.value("type", std::string("didc"));
      if (type == "didc") {
        sc.controller = ControllerKind::kDidc;
      } else if (type == "nspidc") {
        sc.controller = ControllerKind::kNspidc;
      } else if (type == "bc") {
        sc.controller = ControllerKind::kBalance;
      } else {
        throw std::invalid_argument("scenario: unknown controller '" + type + "'");
      }
      sc.gains.gain_scale = c.value("gain_scale", 1.0);
      sc.nspidc_gain_scale = c.value("nspidc_gain_scale", 1.0);
    }

    if (j.contains("gains")) {
      const auto& g = j["gains"];
      sc.gains.q1 = g.value("q1", sc.gains.q1);
      sc.gains.q2 = g.value("q2", sc.gains.q2);
      sc.gains.r = g.value("r", sc.gains.r);
      sc.gains.base_xy_kp = g.value("base_xy_kp", sc.gains.base_xy_kp);
      sc.gains.base_xy_kd = g.value("base_xy_kd", sc.gains.base_xy_kd);
    }

    if (j.contains("solver")) {
      const auto& s = j["solver"];
      const std::string type = s.value("type", std::string("gpgd"));
      if (type == "gpgd") {
        sc.solver.kind = SolverKind::kGpgd;
      } else if (type == "pyramid") {
        sc.solver.kind = SolverKind::kPyramid;
      } else {
        throw std::invalid_argument("scenario: unknown solver '" + type + "'");
      }
      sc.solver.facets = s.value("facets", 4);
      sc.solver.max_iters = s.value("max_iters", 100);
      sc.solver.tol = s.value("tol", 1e-2);
    }

    if (j.contains("qp")) {
      const auto& q = j["qp"];
      if (q.contains("s1")) {
        const auto& s1 = q["s1"];
        if (s1.size() != 6) throw std::invalid_argument("scenario: qp.s1 needs 6 entries");
        for (int i = 0; i < 6; ++i) sc.qp.s1(i) = s1[i].get<double>();
      }
      sc.qp.force_weight = q.value("force_weight", sc.qp.force_weight);
      sc.qp.rate_weight = q.value("rate_weight", sc.qp.rate_weight);
      sc.qp.limits.mu = q.value("mu", sc.qp.limits.mu);
      sc.qp.limits.fz_min = q.value("fz_min", sc.qp.limits.fz_min);
      sc.qp.limits.fz_max = q.value("fz_max", sc.qp.limits.fz_max);
    }
    sc.qp.max_iters = sc.solver.max_iters;
    sc.qp.tol = sc.solver.tol;
    sc.qp.pyramid_facets = sc.solver.kind == SolverKind::kPyramid ? sc.solver.facets : 0;

    if (j.contains("planner")) {
      const auto& p = j["planner"];
      sc.planner.k_b = p.value("k_b", sc.planner.k_b);
      sc.planner.k_theta = p.value("k_theta", sc.planner.k_theta);
      sc.planner.beta = p.value("beta", sc.planner.beta);
      sc.planner.height_min = p.value("height_min", sc.planner.height_min);
      sc.planner.height_max = p.value("height_max", sc.planner.height_max);
      sc.planner.omega_max = p.value("omega_max", sc.planner.omega_max);
      sc.planner.alpha_max = p.value("alpha_max", sc.planner.alpha_max);
      sc.planner.height_rate_down = p.value("height_rate_down", sc.planner.height_rate_down);
      sc.planner.height_rate_up = p.value("height_rate_up", sc.planner.height_rate_up);
    }

    for (const auto& row : j.value("schedule", nlohmann::json::array())) {
      if (row.size() != 4) {
        throw std::invalid_argument("scenario: schedule rows are [t, vx, vy, yaw_rate]");
      }
      sc.schedule.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                             row[3].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario: malformed file: ") + e.what());
  }

  sc.world.validate();
  if (!(sc.duration > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  if (!(sc.gait.period > 0.0)) throw std::invalid_argument("scenario: gait period must be positive");
  for (double d : sc.gait.duty) {
    if (!(d > 0.0) || d > 1.0) throw std::invalid_argument("scenario: duty must be in (0, 1]");
  }
  if (!(sc.planner.beta > 0.0) || sc.planner.beta > 1.0) {
    throw std::invalid_argument("scenario: beta must be in (0, 1]");
  }
  if (sc.gains.gain_scale <= 0.0) {
    throw std::invalid_argument("scenario: gain_scale must be positive");
  }
  double prev_t = -1.0;
  for (const auto& row : sc.schedule) {
    if (row.t < prev_t) throw std::invalid_argument("scenario: schedule times must be ascending");
    prev_t = row.t;
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("scenario: parse error in '" + path + "': " + e.what());
  }
  Scenario sc = parse_scenario(j, detail::dir_of(path));
  sc.hash = fnv1a(bytes);
  return sc;
}

}  // namespace didc
