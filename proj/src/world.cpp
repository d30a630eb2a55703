#include "guide/world.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace guide {

GridMap::GridMap(int width, int height, double resolution)
    : width_(width), height_(height), resolution_(resolution) {
  if (width <= 0 || height <= 0) throw Error("map: width and height must be positive");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw Error("map: resolution must be positive");
  occupancy_.assign(static_cast<std::size_t>(width) * height, 0);
}

bool GridMap::contains(const Vec2& p) const {
  return p.x() >= 0.0 && p.y() >= 0.0 && p.x() < width_ * resolution_ && p.y() < height_ * resolution_;
}

void GridMap::set_occupied(Cell c, bool value) {
  if (!in_bounds(c)) throw Error("map.occupied: cell out of bounds");
  occupancy_[index(c)] = value ? 1 : 0;
}

Cell cell_of(const Vec2& p, const GridMap& map) {
  if (!map.contains(p)) throw Error("cell_of: position outside map extent");
  Cell c{static_cast<int>(std::floor(p.x() / map.resolution())),
         static_cast<int>(std::floor(p.y() / map.resolution()))};
  // x/res can round up to width for x just below the extent.
  c.x = std::min(c.x, map.width() - 1);
  c.y = std::min(c.y, map.height() - 1);
  return c;
}

Vec2 center_of(Cell cell, const GridMap& map) {
  if (!map.in_bounds(cell)) throw Error("center_of: cell out of bounds");
  return {(cell.x + 0.5) * map.resolution(), (cell.y + 0.5) * map.resolution()};
}

Fan Fan::make(const Vec2& apex, const Vec2& axis, double total_angle, double r_min, double r_max) {
  if (!(total_angle >= 0.0 && total_angle <= std::numbers::pi)) throw Error("fan: total_angle must lie in [0, pi]");
  if (!(r_min >= 0.0 && r_min <= r_max)) throw Error("fan: need 0 <= r_min <= r_max");
  const double n = axis.norm();
  if (!(n > 0.0)) throw Error("fan: axis must be nonzero");
  return Fan{apex, axis / n, total_angle, r_min, r_max};
}

bool point_in_fan(const Vec2& p, const Fan& fan) {
  const Vec2 d = p - fan.apex;
  const double r = d.norm();
  if (r < fan.r_min || r > fan.r_max) return false;
  if (r == 0.0) return true;
  // atan2 of the cross/dot pair keeps the angle symmetric and well conditioned near 0 and pi.
  const double cross = fan.axis.x() * d.y() - fan.axis.y() * d.x();
  const double angle = std::abs(std::atan2(cross, fan.axis.dot(d)));
  return angle <= fan.total_angle / 2.0;
}

bool Scene::is_affordance(Cell c) const {
  if (!map.in_bounds(c) || affordance_mask_.empty()) return false;
  return affordance_mask_[map.index(c)] != 0;
}

void Scene::index_affordance() {
  affordance_mask_.assign(map.cell_count(), 0);
  for (const Cell& c : affordance_cells) {
    if (!map.in_bounds(c)) throw Error("affordance out of bounds");
    affordance_mask_[map.index(c)] = 1;
  }
}

void Scene::validate() const {
  if (goals.empty()) throw Error("goals: at least one goal required");
  if (guide_goal >= goals.size()) throw Error("guide_goal: index out of range");
  for (const Cell& g : goals) {
    if (!map.in_bounds(g)) throw Error("goal out of bounds");
    if (map.occupied(g)) throw Error("goal occupied");
  }
  for (const Cell& c : affordance_cells)
    if (!map.in_bounds(c)) throw Error("affordance out of bounds");
  if (!map.contains(human_start)) throw Error("human_start: outside map extent");
  if (!map.contains(robot_start)) throw Error("robot_start: outside map extent");
  if (!(time_limit_s >= 0.0)) throw Error("time_limit_s: must be nonnegative");
}

bool in_affordance(const Vec2& p, const Scene& scene) {
  if (!scene.map.contains(p)) return false;
  return scene.is_affordance(cell_of(p, scene.map));
}

namespace {

using nlohmann::json;

const json& require(const json& node, const char* key, const char* path) {
  if (!node.is_object() || !node.contains(key)) throw Error(std::string("missing field ") + path);
  return node.at(key);
}

Cell parse_cell(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw Error(field + ": expected [x, y] integer cell");
  return {j[0].get<int>(), j[1].get<int>()};
}

Vec2 parse_point(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(field + ": expected [x, y] position");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Cell> parse_cells(const json& j, const std::string& field) {
  if (!j.is_array()) throw Error(field + ": expected list of cells");
  std::vector<Cell> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_cell(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

Scene load_scene(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(std::string("scene parse error: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw Error("scene parse error: top level must be an object");
    if (require(doc, "schema", "schema").get<int>() != 1) throw Error("schema: unsupported version");

    const json& m = require(doc, "map", "map");
    GridMap map(require(m, "width", "map.width").get<int>(), require(m, "height", "map.height").get<int>(),
                m.value("resolution", 0.5));
    if (m.contains("occupied")) {
      for (const Cell& c : parse_cells(m.at("occupied"), "map.occupied")) {
        if (!map.in_bounds(c)) throw Error("map.occupied: cell out of bounds");
        map.set_occupied(c);
      }
    }

    Scene scene;
    scene.name = doc.value("name", std::string("scene"));
    scene.map = std::move(map);
    scene.goals = parse_cells(require(doc, "goals", "goals"), "goals");
    const json& gg = require(doc, "guide_goal", "guide_goal");
    if (!gg.is_number_integer() || gg.get<long long>() < 0) throw Error("guide_goal: expected nonnegative index");
    scene.guide_goal = gg.get<std::size_t>();
    if (doc.contains("affordance")) scene.affordance_cells = parse_cells(doc.at("affordance"), "affordance");
    scene.human_start = parse_point(require(doc, "human_start", "human_start"), "human_start");
    scene.robot_start = parse_point(require(doc, "robot_start", "robot_start"), "robot_start");
    scene.time_limit_s = doc.value("time_limit_s", 0.0);

    for (const Cell& c : scene.affordance_cells)
      if (!scene.map.in_bounds(c)) throw Error("affordance out of bounds");
    scene.validate();
    scene.index_affordance();
    return scene;
  } catch (const json::exception& e) {
    throw Error(std::string("scene field type error: ") + e.what());
  }
}

Scene load_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scene file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_scene(buffer.str());
}

nlohmann::json scene_to_json(const Scene& scene) {
  using nlohmann::json;
  json occupied = json::array();
  for (int y = 0; y < scene.map.height(); ++y)
    for (int x = 0; x < scene.map.width(); ++x)
      if (scene.map.occupied({x, y})) occupied.push_back({x, y});
  json goals = json::array();
  for (const Cell& g : scene.goals) goals.push_back({g.x, g.y});
  json aff = json::array();
  for (const Cell& c : scene.affordance_cells) aff.push_back({c.x, c.y});
  return json{{"schema", 1},
              {"name", scene.name},
              {"map",
               {{"width", scene.map.width()},
                {"height", scene.map.height()},
                {"resolution", scene.map.resolution()},
                {"occupied", occupied}}},
              {"goals", goals},
              {"guide_goal", scene.guide_goal},
              {"affordance", aff},
              {"human_start", {scene.human_start.x(), scene.human_start.y()}},
              {"robot_start", {scene.robot_start.x(), scene.robot_start.y()}},
              {"time_limit_s", scene.time_limit_s}};
}

}  // namespace guide
