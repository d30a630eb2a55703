#include "guide/mdp.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <queue>

#include "guide/kernels.hpp"

namespace guide::mdp {

ActionSet::ActionSet(std::vector<Action> actions) : actions_(std::move(actions)) {
  if (actions_.empty()) throw Error("action set: empty");
  if (actions_.size() > 0xFFFF) throw Error("action set: too many actions");
  for (const Action& a : actions_) {
    if (!(a.speed >= 0.0) || !std::isfinite(a.speed) || !std::isfinite(a.heading))
      throw Error("action set: speeds must be finite and nonnegative");
    v_max_ = std::max(v_max_, a.speed);
  }
  if (!(v_max_ > 0.0)) throw Error("action set: v_max must be positive");
}

ActionSet ActionSet::king_moves() {
  std::vector<Action> actions{{0.0, 0.0}};
  for (int k = 0; k < 8; ++k)
    actions.push_back({k % 2 == 0 ? 1.0 : std::numbers::sqrt2, k * std::numbers::pi / 4.0});
  return ActionSet(std::move(actions));
}

ActionSet ActionSet::product(std::span<const double> speeds, std::span<const double> headings) {
  std::vector<Action> actions;
  bool has_zero = false;
  for (double v : speeds) has_zero = has_zero || v == 0.0;
  if (has_zero) actions.push_back({0.0, 0.0});
  for (double v : speeds) {
    if (v == 0.0) continue;
    for (double h : headings) actions.push_back({v, h});
  }
  for (std::size_t i = 0; i < headings.size(); ++i)
    for (std::size_t j = i + 1; j < headings.size(); ++j) {
      const double diff = std::remainder(headings[i] - headings[j], 2.0 * std::numbers::pi);
      if (std::abs(diff) < 1e-12) throw Error("action set: headings must be distinct modulo 2*pi");
    }
  return ActionSet(std::move(actions));
}

void MdpParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("gamma must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (max_sweeps <= 0) throw Error("max_sweeps must be positive");
  if (!(occupation_cost >= 0.0) || !(effort_cost >= 0.0) || !(idle_effort >= 0.0))
    throw Error("costs must be nonnegative");
}

ValueField::ValueField(Cell goal, int width, int height, std::vector<double> values,
                       std::vector<std::uint16_t> greedy, int sweeps)
    : goal_(goal), width_(width), height_(height), values_(std::move(values)), greedy_(std::move(greedy)),
      sweeps_(sweeps) {}

Cell transition(Cell s, const Action& a, const GridMap& map) {
  const double x = s.x + a.speed * std::cos(a.heading);
  const double y = s.y + a.speed * std::sin(a.heading);
  const int nx = static_cast<int>(std::lround(x));
  const int ny = static_cast<int>(std::lround(y));
  return {std::clamp(nx, 0, map.width() - 1), std::clamp(ny, 0, map.height() - 1)};
}

double effort(const Action& a, const MdpParams& params) {
  return params.effort_cost * (a.speed > 0.0 ? a.speed : params.idle_effort);
}

double reward(Cell s, const Action& a, Cell goal, const GridMap& map, const MdpParams& params) {
  if (s == goal) return 0.0;
  const Cell next = transition(s, a, map);
  const double occupation = map.occupied(next) ? params.occupation_cost : 0.0;
  return -params.alpha * occupation - (1.0 - params.alpha) * effort(a, params);
}

namespace {

kernels::FlatMdp flatten(Cell goal, const GridMap& map, const ActionSet& actions, const MdpParams& params) {
  kernels::FlatMdp flat;
  flat.states = map.cell_count();
  flat.actions = actions.size();
  flat.gamma = params.gamma;
  flat.successor.resize(flat.states * flat.actions);
  flat.reward.resize(flat.states * flat.actions);
  for (std::size_t s = 0; s < flat.states; ++s) {
    const Cell cell = map.cell_at(s);
    for (std::size_t a = 0; a < flat.actions; ++a) {
      const std::size_t k = s * flat.actions + a;
      if (cell == goal) {
        flat.successor[k] = static_cast<std::uint32_t>(s);
        flat.reward[k] = 0.0;
      } else {
        flat.successor[k] = static_cast<std::uint32_t>(map.index(transition(cell, actions[a], map)));
        flat.reward[k] = reward(cell, actions[a], goal, map, params);
      }
    }
  }
  return flat;
}

}  // namespace

ValueField solve(Cell goal, const GridMap& map, const ActionSet& actions, const MdpParams& params,
                 Execution execution) {
  params.validate();
  if (!map.in_bounds(goal)) throw Error("solve: goal out of bounds");
  if (map.occupied(goal)) throw Error("solve: goal occupied");

  const kernels::FlatMdp flat = flatten(goal, map, actions, params);
  std::vector<double> current(flat.states, 0.0);
  std::vector<double> next(flat.states, 0.0);
  // An update below eps(1-g)/g leaves every value within eps of the fixed point.
  const double stop = params.epsilon * (1.0 - params.gamma) / params.gamma;
  int sweeps = 0;
  for (;;) {
    if (sweeps >= params.max_sweeps) throw Error("solve: value iteration did not converge");
    const double delta = execution == Execution::Parallel
                             ? kernels::bellman_sweep_parallel(flat, current, next)
                             : kernels::bellman_sweep_serial(flat, current, next);
    ++sweeps;
    current.swap(next);
    if (delta < stop) break;
  }
  std::vector<std::uint16_t> greedy(flat.states, 0);
  if (execution == Execution::Parallel)
    kernels::greedy_policy_parallel(flat, current, greedy);
  else
    kernels::greedy_policy_serial(flat, current, greedy);
  return ValueField(goal, map.width(), map.height(), std::move(current), std::move(greedy), sweeps);
}

std::vector<ValueField> solve_all(std::span<const Cell> goals, const GridMap& map, const ActionSet& actions,
                                  const MdpParams& params, Execution execution) {
  std::vector<std::optional<ValueField>> slots(goals.size());
  if (execution == Execution::Parallel) {
    std::exception_ptr failure;
    const auto n = static_cast<long long>(goals.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
      try {
        slots[i].emplace(solve(goals[i], map, actions, params, Execution::Serial));
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::size_t i = 0; i < goals.size(); ++i) slots[i].emplace(solve(goals[i], map, actions, params, execution));
  }
  std::vector<ValueField> fields;
  fields.reserve(goals.size());
  for (auto& s : slots) fields.push_back(std::move(*s));
  return fields;
}

double revised_q(Cell s, const Action& a, const ValueField& field, const GridMap& map, const MdpParams& params) {
  const Cell next = s == field.goal() ? s : transition(s, a, map);
  return params.w * reward(s, a, field.goal(), map, params) + params.gamma * field.value(next);
}

std::optional<int> min_steps(Cell from, Cell to, const GridMap& map, const ActionSet& actions) {
  if (!map.in_bounds(from) || !map.in_bounds(to)) throw Error("min_steps: cell out of bounds");
  if (from == to) return 0;
  std::vector<int> depth(map.cell_count(), -1);
  std::queue<Cell> frontier;
  depth[map.index(from)] = 0;
  frontier.push(from);
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    for (const Action& a : actions) {
      const Cell n = transition(c, a, map);
      if (map.occupied(n) || depth[map.index(n)] >= 0) continue;
      depth[map.index(n)] = depth[map.index(c)] + 1;
      if (n == to) return depth[map.index(n)];
      frontier.push(n);
    }
  }
  return std::nullopt;
}

std::vector<Cell> greedy_path(Cell from, const ValueField& field, const GridMap& map, const ActionSet& actions,
                              std::size_t max_len) {
  std::vector<Cell> path;
  Cell c = from;
  while (c != field.goal() && path.size() < max_len) {
    const Cell n = transition(c, actions[field.greedy(c)], map);
    if (n == c) break;
    path.push_back(n);
    c = n;
  }
  return path;
}

void write_matrix(std::ostream& out, const ValueField& field) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      if (x) out << ' ';
      const double v = field.value({x, y});
      out << (v == 0.0 ? 0.0 : v);  // no "-0"
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace guide::mdp
