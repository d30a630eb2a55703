#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "guide/error.hpp"

namespace guide {

using Vec2 = Eigen::Vector2d;

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Occupancy grid. Cell (x, y) covers [x*res, (x+1)*res) x [y*res, (y+1)*res).
class GridMap {
 public:
  GridMap(int width, int height, double resolution);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  std::size_t cell_count() const { return occupancy_.size(); }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  /// True iff the position lies inside [0, width*res) x [0, height*res).
  bool contains(const Vec2& p) const;

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at(std::size_t index) const {
    return {static_cast<int>(index % width_), static_cast<int>(index / width_)};
  }

  bool occupied(Cell c) const { return occupancy_[index(c)] != 0; }
  void set_occupied(Cell c, bool value = true);

 private:
  int width_;
  int height_;
  double resolution_;
  std::vector<unsigned char> occupancy_;
};

/// floor(p / resolution); throws Error when p is outside the map extent.
Cell cell_of(const Vec2& p, const GridMap& map);
/// Center of a cell; throws Error for out-of-bounds cells.
Vec2 center_of(Cell cell, const GridMap& map);

/// Symmetric circular sector: half of total_angle on each side of axis.
struct Fan {
  Vec2 apex = Vec2::Zero();
  Vec2 axis = Vec2::UnitX();
  double total_angle = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;

  /// Validating constructor; normalizes axis.
  static Fan make(const Vec2& apex, const Vec2& axis, double total_angle, double r_min, double r_max);
};

/// Boundary inclusive. A point at the apex is decided by the radius test alone.
bool point_in_fan(const Vec2& p, const Fan& fan);

struct Pose {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

struct Scene {
  std::string name;
  GridMap map{1, 1, 0.5};
  std::vector<Cell> goals;
  std::size_t guide_goal = 0;
  std::vector<Cell> affordance_cells;
  Vec2 human_start = Vec2::Zero();
  Vec2 robot_start = Vec2::Zero();
  /// Zero means "derive from the nodes-to-go at trial start".
  double time_limit_s = 0.0;

  Cell guide_cell() const { return goals[guide_goal]; }
  bool is_affordance(Cell c) const;

  /// Rebuilds the affordance lookup; call after editing affordance_cells.
  void index_affordance();
  /// Throws Error naming the offending field.
  void validate() const;

 private:
  std::vector<unsigned char> affordance_mask_;
};

bool in_affordance(const Vec2& p, const Scene& scene);

Scene load_scene(std::string_view document);
Scene load_scene_file(const std::filesystem::path& path);
nlohmann::json scene_to_json(const Scene& scene);

}  // namespace guide
