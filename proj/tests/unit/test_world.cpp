#include <doctest.h>

#include <numbers>

#include "guide/world.hpp"

using namespace guide;

namespace {

const char* kTenByTen = R"({
  "schema": 1, "name": "room",
  "map": {"width": 10, "height": 10},
  "goals": [[0, 0], [9, 0], [0, 9], [9, 9]],
  "guide_goal": 2,
  "affordance": [[4, 4], [5, 4]],
  "human_start": [1.0, 1.0], "robot_start": [2.0, 1.0]
})";

}  // namespace

TEST_SUITE("world") {

TEST_CASE("cell_of and center_of round trip on every cell") {
  for (double res : {0.5, 1.0, 0.3}) {
    GridMap map(7, 4, res);
    for (int y = 0; y < map.height(); ++y)
      for (int x = 0; x < map.width(); ++x) CHECK(cell_of(center_of({x, y}, map), map) == Cell{x, y});
  }
}

TEST_CASE("floor rule on cell boundaries") {
  GridMap map(4, 4, 0.5);
  CHECK(cell_of({0.5, 0.0}, map) == Cell{1, 0});
  CHECK(cell_of({0.4999, 0.9999}, map) == Cell{0, 1});
  CHECK(cell_of({1.9999999, 1.9999999}, map) == Cell{3, 3});
  CHECK_THROWS_AS(cell_of({2.0, 0.0}, map), Error);
  CHECK_THROWS_AS(cell_of({-0.01, 0.0}, map), Error);
}

TEST_CASE("fan membership is inclusive at the angular and radial edges") {
  const Fan fan = Fan::make({0, 0}, {1, 0}, std::numbers::pi / 2, 1.0, 2.0);
  CHECK(point_in_fan({1.5, 0.0}, fan));
  CHECK(point_in_fan({1.0, 0.0}, fan));
  CHECK(point_in_fan({2.0, 0.0}, fan));
  const double a = std::numbers::pi / 4;
  CHECK(point_in_fan({1.5 * std::cos(a), 1.5 * std::sin(a)}, fan));
  CHECK_FALSE(point_in_fan({1.5 * std::cos(a + 1e-6), 1.5 * std::sin(a + 1e-6)}, fan));
  CHECK_FALSE(point_in_fan({0.5, 0.0}, fan));
  CHECK_FALSE(point_in_fan({-1.5, 0.0}, fan));
  // zero-width fan keeps only the axis
  const Fan ray = Fan::make({0, 0}, {0, 2}, 0.0, 0.0, 3.0);
  CHECK(point_in_fan({0.0, 1.0}, ray));
  CHECK_FALSE(point_in_fan({1e-3, 1.0}, ray));
}

TEST_CASE("fan rejects bad geometry") {
  CHECK_THROWS_AS(Fan::make({0, 0}, {0, 0}, 1.0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(Fan::make({0, 0}, {1, 0}, 4.0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(Fan::make({0, 0}, {1, 0}, 1.0, 2.0, 1.0), Error);
}

TEST_CASE("load_scene reads the documented fields") {
  const Scene s = load_scene(kTenByTen);
  CHECK(s.goals.size() == 4);
  CHECK(s.guide_cell() == Cell{0, 9});
  CHECK(s.map.resolution() == doctest::Approx(0.5));
  CHECK(s.time_limit_s == 0.0);
  CHECK(in_affordance({2.1, 2.2}, s));
  CHECK(in_affordance({2.5, 2.0}, s));  // boundary point belongs to the upper cell (5, 4)
  CHECK_FALSE(in_affordance({1.9, 2.0}, s));
  CHECK_FALSE(in_affordance({50.0, 2.0}, s));
}

TEST_CASE("scene round trips through its JSON form") {
  const Scene a = load_scene(kTenByTen);
  const Scene b = load_scene(scene_to_json(a).dump());
  CHECK(scene_to_json(b) == scene_to_json(a));
}

TEST_CASE("load_scene names the failing field") {
  auto message = [](const std::string& doc) {
    try {
      load_scene(doc);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  auto edit = [](std::string from, std::string to) {
    std::string s = kTenByTen;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK(message(edit(R"("map": {"width": 10, "height": 10})",
                     R"("map": {"width": 10, "height": 10, "occupied": [[0, 9]]})")) == "goal occupied");
  CHECK(message(edit(R"([[4, 4], [5, 4]])", R"([[40, 4]])")) == "affordance out of bounds");
  CHECK(message(edit(R"("guide_goal": 2,)", "")).find("guide_goal") != std::string::npos);
  CHECK(message(edit(R"("schema": 1)", R"("schema": 2)")).find("schema") != std::string::npos);
  CHECK(message("{not json").find("parse") != std::string::npos);
  CHECK(message(edit("[1.0, 1.0]", "[9.0, 1.0]")).find("human_start") != std::string::npos);
}

}
