#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "guide/prediction.hpp"

namespace guide::planner {

using prediction::Behavior;

struct PlannerParams {
  // Cost weights.
  double w_d = 1.0;
  double w_t = 1.0;
  double w_aff = 1.0;
  double k_d = 100.0;
  double affordance_cost = 10.0;  // C_0 of the affordance term
  double t_per_step = 1.0;        // s
  std::size_t l_target = 2;       // lower bound on target-path points (padded with the goal)
  std::size_t l_real = 2;         // lower bound on real-path points (padded with the last point)

  // Search.
  double c = 5.0;                           // half the affordance constant
  double theta_s = 1.0471975511965976;      // pi/3
  double delta_theta = 0.3141592653589793;  // pi/10
  double lead_radius = 2.0;                 // m, arc radius for leading
  double point_radius = 3.0;                // m, arc radius for pointing
  int extra_depth = 6;                      // max_depth = n_g + extra_depth
  int max_depth = 0;                        // > 0 overrides the n_g-derived depth
  std::size_t iterations = 2000;
  double wall_ms = 0.0;                     // > 0 caps the search by wall clock (nondeterministic)

  double radius(Behavior b) const { return b == Behavior::Lead ? lead_radius : point_radius; }
  void validate() const;
};

/// -mean_cost + c*sqrt(ln N / n); +infinity for unvisited nodes.
double node_score(std::size_t visits, double cum_cost, std::size_t parent_visits, double c);

/// Arc points at radius r(behavior) around the human, symmetric about human->goal,
/// at angles -theta_s/2 + k*delta_theta for k = 0..floor(theta_s/delta_theta).
std::vector<Vec2> expansion_samples(const Vec2& human_pos, const Vec2& goal_pos, Behavior behavior,
                                    const PlannerParams& params);

// Cost terms. Paths are sequences of positions one time step apart.
double distance_cost(std::span<const Vec2> target, std::span<const Vec2> real, std::size_t n_g);
double time_cost(std::size_t l_real, std::size_t n_g, double t_per_step);
double affordance_cost(std::span<const Vec2> real, const Scene& scene, double c0);
double final_cost(double c_dist, double c_time, double c_aff, const PlannerParams& params);

/// Full weighted cost of a simulated human path against a target path.
double path_cost(std::span<const Vec2> target, std::span<const Vec2> real, std::size_t n_g, const Scene& scene,
                 const PlannerParams& params);

struct SearchState {
  prediction::HumanContext human;
  Vec2 robot;
  Behavior behavior = Behavior::Lead;
};

struct Plan {
  Behavior behavior = Behavior::Lead;
  Vec2 robot_target = Vec2::Zero();
  double expected_cost = 0.0;
  std::size_t child_index = 0;
  std::size_t iterations = 0;
  int max_depth_reached = 0;
  std::size_t n_g = 0;
  /// Arc the robot target was drawn from; doubles as the position options of the influence.
  std::vector<Vec2> arc;
};

struct SearchNode {
  Behavior behavior = Behavior::Lead;
  std::size_t sample = 0;
  int depth = 0;
  std::size_t visits = 0;
  double cum_cost = 0.0;
  Vec2 human = Vec2::Zero();  // last simulated human position at this node
  Vec2 robot = Vec2::Zero();
  std::vector<SearchNode> children;

  double mean_cost() const { return visits ? cum_cost / visits : std::numeric_limits<double>::quiet_NaN(); }
};

/// Search tree retained after plan_step for inspection.
struct SearchTree {
  SearchNode root;
  /// Line-delimited records: id, parent, depth, behavior, visits, mean cost.
  void dump(std::ostream& out) const;
};

/// Shared per-planning-step quantities: nodes-to-go and the target path to the guide goal.
struct Guidance {
  std::size_t n_g = 0;
  std::vector<Vec2> target;
};

Guidance guidance_for(Cell human, const prediction::Predictor& predictor, const PlannerParams& params);

/// Open-loop MCTS over (behavior, arc sample) sequences. Human responses are resampled from the
/// predictor on every traversal. Deterministic for a fixed seed unless wall_ms > 0.
Plan plan_step(const SearchState& root, const prediction::Predictor& predictor, const PlannerParams& params,
               std::uint64_t seed, SearchTree* tree_out = nullptr);

}  // namespace guide::planner
