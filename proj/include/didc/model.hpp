#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "didc/types.hpp"

namespace didc {

struct LinkParams {
  std::string name;
  double mass = 0.0;
  Vec3 com = Vec3::Zero();      // in link frame
  Mat3 inertia = Mat3::Zero();  // about the COM, link frame
};

// Revolute joint. The joint frame is the child link frame; placement is the
// fixed transform from the parent frame to the joint frame at q = 0.
struct JointParams {
  int parent = -1;  // link index, -1 means base
  Vec3 axis = Vec3::UnitZ();
  Mat3 rot = Mat3::Identity();
  Vec3 trans = Vec3::Zero();
};

struct FootParams {
  int parent_link = 0;
  Vec3 offset = Vec3::Zero();  // point in the parent link frame
};

// Floating base plus four identical 3-joint legs, leg-major link ordering:
// link 3*leg + {0,1,2} = hip, thigh, calf. Joint i moves link i.
struct RobotModel {
  std::string name;
  LinkParams base;
  std::array<LinkParams, kNumJoints> links;
  std::array<JointParams, kNumJoints> joints;
  std::array<FootParams, kNumLegs> feet;
  double max_leg_extension = 0.0;

  double total_mass() const {
    double m = base.mass;
    for (const auto& l : links) m += l.mass;
    return m;
  }

  void validate() const {
    auto check_link = [](const LinkParams& l) {
      if (!(l.mass > 0.0)) {
        throw std::invalid_argument("model: link '" + l.name + "' mass must be positive");
      }
      if ((l.inertia - l.inertia.transpose()).norm() > 1e-9) {
        throw std::invalid_argument("model: link '" + l.name + "' inertia not symmetric");
      }
      Eigen::SelfAdjointEigenSolver<Mat3> es(l.inertia);
      if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("model: link '" + l.name + "' inertia not positive definite");
      }
    };
    check_link(base);
    for (const auto& l : links) check_link(l);
    for (int i = 0; i < kNumJoints; ++i) {
      const auto& j = joints[i];
      if (j.parent < -1 || j.parent >= i) {
        throw std::invalid_argument("model: joint parent indices must precede the joint");
      }
      if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument("model: joint axis must be a unit vector");
      }
      if ((j.rot * j.rot.transpose() - Mat3::Identity()).norm() > 1e-9) {
        throw std::invalid_argument("model: joint placement rotation not orthonormal");
      }
    }
    for (const auto& f : feet) {
      if (f.parent_link < 0 || f.parent_link >= kNumJoints) {
        throw std::invalid_argument("model: foot parent link out of range");
      }
    }
    if (!(max_leg_extension > 0.0)) {
      throw std::invalid_argument("model: max_leg_extension must be positive");
    }
  }
};

namespace detail {

inline Vec3 parse_vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("model: expected a 3-vector");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Mat3 parse_mat3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("model: expected a 3x3 matrix");
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) {
      throw std::invalid_argument("model: expected a 3x3 matrix");
    }
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

inline LinkParams parse_link(const nlohmann::json& j) {
  LinkParams l;
  l.name = j.value("name", "");
  l.mass = j.at("mass").get<double>();
  l.com = parse_vec3(j.at("com"));
  l.inertia = parse_mat3(j.at("inertia"));
  return l;
}

}  // namespace detail

inline RobotModel parse_model(const nlohmann::json& j) {
  RobotModel m;
  try {
    m.name = j.value("name", "unnamed");
    m.max_leg_extension = j.at("max_leg_extension").get<double>();
    m.base = detail::parse_link(j.at("base"));
    if (m.base.name.empty()) m.base.name = "base";
    const auto& legs = j.at("legs");
    if (!legs.is_array() || legs.size() != kNumLegs) {
      throw std::invalid_argument("model: expected exactly 4 legs");
    }
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const auto& jl = legs[leg];
      const auto& jjoints = jl.at("joints");
      const auto& jlinks = jl.at("links");
      if (jjoints.size() != kJointsPerLeg || jlinks.size() != kJointsPerLeg) {
        throw std::invalid_argument("model: each leg needs 3 joints and 3 links");
      }
      for (int k = 0; k < kJointsPerLeg; ++k) {
        const int idx = leg * kJointsPerLeg + k;
        JointParams jp;
        jp.parent = (k == 0) ? -1 : idx - 1;
        jp.axis = detail::parse_vec3(jjoints[k].at("axis"));
        jp.trans = detail::parse_vec3(jjoints[k].at("xyz"));
        jp.rot = rpy_to_rot(jjoints[k].contains("rpy") ? detail::parse_vec3(jjoints[k]["rpy"])
                                                       : Vec3::Zero().eval());
        m.joints[idx] = jp;
        m.links[idx] = detail::parse_link(jlinks[k]);
        if (m.links[idx].name.empty()) {
          m.links[idx].name = jl.value("name", "leg" + std::to_string(leg)) + "_" + std::to_string(k);
        }
      }
      m.feet[leg].parent_link = leg * kJointsPerLeg + 2;
      m.feet[leg].offset = detail::parse_vec3(jl.at("foot").at("xyz"));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model: malformed file: ") + e.what());
  }
  m.validate();
  return m;
}

inline RobotModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("model: cannot open '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("model: parse error in '" + path + "': " + e.what());
  }
  return parse_model(j);
}

inline std::string default_model_path() {
  return std::string(DIDC_DATA_DIR) + "/go2_like.json";
}

}  // namespace didc
