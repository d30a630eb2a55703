#pragma once

// Reference computations used by the unit and acceptance suites. Each one is written from the
// model definitions directly and only borrows the library's data types, never its solvers.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "guide/planner.hpp"

namespace oracle {

using guide::Cell;
using guide::GridMap;
using guide::Vec2;

inline Cell step(Cell s, const guide::mdp::Action& a, const GridMap& map) {
  const double x = s.x + a.speed * std::cos(a.heading);
  const double y = s.y + a.speed * std::sin(a.heading);
  int nx = static_cast<int>(std::lround(x));
  int ny = static_cast<int>(std::lround(y));
  nx = std::clamp(nx, 0, map.width() - 1);
  ny = std::clamp(ny, 0, map.height() - 1);
  return {nx, ny};
}

inline double reward(Cell s, const guide::mdp::Action& a, Cell goal, const GridMap& map,
                     const guide::mdp::MdpParams& p) {
  if (s == goal) return 0.0;
  const Cell n = step(s, a, map);
  const double occ = map.occupied(n) ? p.occupation_cost : 0.0;
  const double disp = a.speed > 0.0 ? a.speed : p.idle_effort;
  return -p.alpha * occ - (1.0 - p.alpha) * p.effort_cost * disp;
}

/// Backward induction over a horizon long enough that the discounted tail is below tol.
inline std::vector<double> finite_horizon(Cell goal, const GridMap& map, const guide::mdp::ActionSet& actions,
                                          const guide::mdp::MdpParams& p, double tol) {
  double rmax = 0.0;
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      for (const auto& a : actions) rmax = std::max(rmax, std::abs(oracle::reward({x, y}, a, goal, map, p)));
  int horizon = 1;
  while (std::pow(p.gamma, horizon) * rmax / (1.0 - p.gamma) >= tol) ++horizon;

  std::vector<double> v(map.cell_count(), 0.0), next(map.cell_count(), 0.0);
  for (int k = 0; k < horizon; ++k) {
    for (int y = 0; y < map.height(); ++y)
      for (int x = 0; x < map.width(); ++x) {
        const Cell s{x, y};
        if (s == goal) {
          next[map.index(s)] = 0.0;
          continue;
        }
        double best = -INFINITY;
        for (const auto& a : actions)
          best = std::max(best, oracle::reward(s, a, goal, map, p) + p.gamma * v[map.index(oracle::step(s, a, map))]);
        next[map.index(s)] = best;
      }
    std::swap(v, next);
  }
  return v;
}

/// Exact next-cell law: sum_g p(g) sum_a p(a|g) [T(s,a) = cell].
inline std::map<std::size_t, double> mixture(const guide::prediction::Predictor& pred,
                                             const guide::prediction::HumanContext& ctx,
                                             const guide::prediction::RobotInfluence* infl) {
  const auto& map = pred.scene().map;
  std::map<std::size_t, double> out;
  const auto goals = pred.goal_distribution(ctx, infl);
  for (std::size_t gi = 0; gi < goals.support.size(); ++gi) {
    const std::size_t g = goals.support[gi];
    const auto acts = pred.action_distribution(ctx.latest(), g, ctx.pose(), infl);
    const bool at_goal = ctx.latest() == pred.scene().goals[g];
    for (std::size_t ai = 0; ai < acts.support.size(); ++ai) {
      const Cell n = at_goal ? ctx.latest() : oracle::step(ctx.latest(), pred.actions()[acts.support[ai]], map);
      out[map.index(n)] += goals.probs[gi] * acts.probs[ai];
    }
  }
  return out;
}

inline double total_variation(const std::map<std::size_t, double>& p, const std::map<std::size_t, double>& q) {
  std::map<std::size_t, double> diff = p;
  for (const auto& [k, v] : q) diff[k] -= v;
  double s = 0.0;
  for (const auto& [k, v] : diff) s += std::abs(v);
  return 0.5 * s;
}

/// Robot positions offered at a node: the behavior's arc, clamped into the map.
inline std::vector<Vec2> arc(const Vec2& human, const guide::Scene& scene, guide::planner::Behavior b,
                             const guide::planner::PlannerParams& params) {
  auto pts = guide::planner::expansion_samples(human, guide::center_of(scene.guide_cell(), scene.map), b, params);
  const Vec2 hi(scene.map.width() * scene.map.resolution() - 1e-9, scene.map.height() * scene.map.resolution() - 1e-9);
  for (Vec2& p : pts) p = p.cwiseMax(Vec2::Zero()).cwiseMin(hi);
  return pts;
}

struct Outcome {
  guide::prediction::HumanContext ctx;
  double prob;
};

/// Human responses to robot option (b, k) with their exact probabilities.
inline std::vector<Outcome> respond(const guide::prediction::Predictor& pred, const guide::prediction::HumanContext& ctx,
                                    guide::planner::Behavior b, std::size_t k,
                                    const guide::planner::PlannerParams& params) {
  const auto options = arc(ctx.pose().position, pred.scene(), b, params);
  const Vec2 robot = options[k];
  std::map<std::size_t, double> law;
  if ((robot - ctx.pose().position).norm() > 1e-9) {
    const auto infl = pred.influence(ctx.pose(), robot, b, options);
    law = mixture(pred, ctx, &infl);
  } else {
    law = mixture(pred, ctx, nullptr);
  }
  std::vector<Outcome> out;
  const auto& map = pred.scene().map;
  for (const auto& [idx, p] : law) {
    if (p <= 0.0) continue;
    guide::prediction::HumanContext next = ctx;
    const Cell c = map.cell_at(idx);
    next.observe(c, guide::center_of(c, map), params.t_per_step);
    out.push_back({next, p});
  }
  return out;
}

/// Open-loop depth-2 values: value[i] = min over second options j of E[cost | first i, second j].
/// Child order matches the planner: behaviors {Lead, Point}, then ascending arc sample.
inline std::vector<double> depth2_values(const guide::prediction::Predictor& pred,
                                         const guide::planner::SearchState& root,
                                         const guide::planner::PlannerParams& params) {
  using guide::planner::Behavior;
  const auto guidance = guide::planner::guidance_for(root.human.latest(), pred, params);
  const auto& scene = pred.scene();
  const std::size_t samples = guide::planner::expansion_samples(root.human.pose().position,
                                                                guide::center_of(scene.guide_cell(), scene.map),
                                                                Behavior::Lead, params)
                                  .size();
  std::vector<std::pair<Behavior, std::size_t>> options;
  for (Behavior b : guide::prediction::kBehaviors)
    for (std::size_t k = 0; k < samples; ++k) options.emplace_back(b, k);

  auto cost = [&](const std::vector<Vec2>& path) {
    return guide::planner::path_cost(guidance.target, path, guidance.n_g, scene, params);
  };

  std::vector<double> values;
  for (const auto& [b1, k1] : options) {
    const auto first = respond(pred, root.human, b1, k1, params);
    double best = INFINITY;
    for (const auto& [b2, k2] : options) {
      double expected = 0.0;
      for (const Outcome& o1 : first) {
        const Vec2 p1 = o1.ctx.pose().position;
        if (o1.ctx.latest() == scene.guide_cell()) {
          expected += o1.prob * cost({p1});
          continue;
        }
        for (const Outcome& o2 : respond(pred, o1.ctx, b2, k2, params))
          expected += o1.prob * o2.prob * cost({p1, o2.ctx.pose().position});
      }
      best = std::min(best, expected);
    }
    values.push_back(best);
  }
  return values;
}

}  // namespace oracle
