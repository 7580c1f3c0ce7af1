#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "didc/model.hpp"

using namespace didc;

namespace {

nlohmann::json default_json() {
  std::ifstream in(default_model_path());
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("default model loads and validates") {
  const RobotModel m = load_model(default_model_path());
  REQUIRE(m.name == "go2_like");
  REQUIRE(m.total_mass() == Catch::Approx(6.921 + 4 * (0.678 + 1.152 + 0.241)).epsilon(1e-12));
  REQUIRE(m.max_leg_extension == Catch::Approx(0.42));
  for (int leg = 0; leg < kNumLegs; ++leg) {
    REQUIRE(m.feet[leg].parent_link == leg * kJointsPerLeg + 2);
    REQUIRE(m.joints[leg * kJointsPerLeg].parent == -1);
  }
  // left/right mirror in hip placements
  REQUIRE(m.joints[0].trans.y() == Catch::Approx(-m.joints[3].trans.y()));
  REQUIRE(m.joints[0].trans.x() == Catch::Approx(m.joints[3].trans.x()));
}

TEST_CASE("model validation rejects bad input") {
  SECTION("negative mass") {
    auto j = default_json();
    j["legs"][0]["links"][1]["mass"] = -1.0;
    REQUIRE_THROWS_AS(parse_model(j), std::invalid_argument);
  }
  SECTION("non positive definite inertia") {
    auto j = default_json();
    j["base"]["inertia"] = {{-0.01, 0.0, 0.0}, {0.0, 0.1, 0.0}, {0.0, 0.0, 0.1}};
    REQUIRE_THROWS_AS(parse_model(j), std::invalid_argument);
  }
  SECTION("asymmetric inertia") {
    auto j = default_json();
    j["base"]["inertia"] = {{0.02, 0.01, 0.0}, {0.0, 0.1, 0.0}, {0.0, 0.0, 0.1}};
    REQUIRE_THROWS_AS(parse_model(j), std::invalid_argument);
  }
  SECTION("non unit axis") {
    auto j = default_json();
    j["legs"][2]["joints"][0]["axis"] = {2.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(parse_model(j), std::invalid_argument);
  }
  SECTION("wrong leg count") {
    auto j = default_json();
    j["legs"].erase(3);
    REQUIRE_THROWS_AS(parse_model(j), std::invalid_argument);
  }
  SECTION("missing key") {
    auto j = default_json();
    j["legs"][1]["links"][0].erase("inertia");
    REQUIRE_THROWS_AS(parse_model(j), std::invalid_argument);
  }
  SECTION("zero max extension") {
    auto j = default_json();
    j["max_leg_extension"] = 0.0;
    REQUIRE_THROWS_AS(parse_model(j), std::invalid_argument);
  }
}

TEST_CASE("missing file raises") {
  REQUIRE_THROWS_AS(load_model("/nonexistent/robot.json"), std::invalid_argument);
}
