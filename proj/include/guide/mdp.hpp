#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "guide/world.hpp"

namespace guide::mdp {

/// Commanded motion for one step: speed in cells per step, heading in radians.
struct Action {
  double speed = 0.0;
  double heading = 0.0;
};

class ActionSet {
 public:
  explicit ActionSet(std::vector<Action> actions);

  /// Stay plus the eight grid neighbours. Diagonal moves are commanded at sqrt(2) cells so
  /// the commanded displacement equals the grid displacement.
  static ActionSet king_moves();
  /// Every (speed, heading) pair; zero speed contributes a single stay action placed first.
  static ActionSet product(std::span<const double> speeds, std::span<const double> headings);

  std::size_t size() const { return actions_.size(); }
  const Action& operator[](std::size_t i) const { return actions_[i]; }
  auto begin() const { return actions_.begin(); }
  auto end() const { return actions_.end(); }
  double v_max() const { return v_max_; }

 private:
  std::vector<Action> actions_;
  double v_max_ = 0.0;
};

struct MdpParams {
  double alpha = 0.5;            // occupation vs effort balance
  double occupation_cost = 10.0;  // C_0 for occupied successors
  double effort_cost = 1.0;      // cost per cell of commanded displacement
  double idle_effort = 1.0;      // displacement charged to the zero-speed action, in cells
  double gamma = 0.9;
  double epsilon = 1e-6;
  int max_sweeps = 10000;
  double w = 1.0;                // sub-optimality factor of the revised action value

  void validate() const;
};

enum class Execution { Serial, Parallel };

/// Optimal values and greedy policy for one goal. Immutable once solved.
class ValueField {
 public:
  ValueField(Cell goal, int width, int height, std::vector<double> values, std::vector<std::uint16_t> greedy,
             int sweeps);

  Cell goal() const { return goal_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int sweeps() const { return sweeps_; }
  double value(Cell c) const { return values_[static_cast<std::size_t>(c.y) * width_ + c.x]; }
  std::size_t greedy(Cell c) const { return greedy_[static_cast<std::size_t>(c.y) * width_ + c.x]; }
  std::span<const double> values() const { return values_; }

 private:
  Cell goal_;
  int width_;
  int height_;
  std::vector<double> values_;
  std::vector<std::uint16_t> greedy_;
  int sweeps_;
};

/// Rounds the commanded endpoint to the nearest cell and clamps it into the map.
Cell transition(Cell s, const Action& a, const GridMap& map);

/// Effort charged for an action, in cost units.
double effort(const Action& a, const MdpParams& params);

double reward(Cell s, const Action& a, Cell goal, const GridMap& map, const MdpParams& params);

/// Value iteration with synchronous (Jacobi) sweeps. The goal is absorbing with value 0.
ValueField solve(Cell goal, const GridMap& map, const ActionSet& actions, const MdpParams& params,
                 Execution execution = Execution::Parallel);

/// One field per goal, in goal order.
std::vector<ValueField> solve_all(std::span<const Cell> goals, const GridMap& map, const ActionSet& actions,
                                  const MdpParams& params, Execution execution = Execution::Parallel);

/// w*R(s,a) + gamma*V(s').
double revised_q(Cell s, const Action& a, const ValueField& field, const GridMap& map, const MdpParams& params);

/// Minimum number of actions from `from` to `to` through free cells; nullopt if unreachable.
std::optional<int> min_steps(Cell from, Cell to, const GridMap& map, const ActionSet& actions);

/// Cells visited by following the greedy policy from `from` (excluded) until the goal, at most max_len.
std::vector<Cell> greedy_path(Cell from, const ValueField& field, const GridMap& map, const ActionSet& actions,
                              std::size_t max_len);

/// Text matrix, one map row per line from y = 0 upward, values separated by single spaces.
void write_matrix(std::ostream& out, const ValueField& field);

}  // namespace guide::mdp
