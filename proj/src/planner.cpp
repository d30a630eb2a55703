#include "guide/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>

#include <json.hpp>

namespace guide::planner {

using prediction::HumanContext;
using prediction::Predictor;
using prediction::Rng;

void PlannerParams::validate() const {
  if (!(w_d >= 0.0 && w_t >= 0.0 && w_aff >= 0.0)) throw Error("cost weights must be nonnegative");
  if (!(k_d > 0.0)) throw Error("k_d must be positive");
  if (!(affordance_cost >= 0.0)) throw Error("affordance cost must be nonnegative");
  if (!(t_per_step > 0.0)) throw Error("t_per_step must be positive");
  if (!(theta_s >= 0.0 && theta_s <= std::numbers::pi)) throw Error("theta_s must lie in [0, pi]");
  if (!(delta_theta >= 0.0 && delta_theta <= std::numbers::pi)) throw Error("delta_theta must lie in [0, pi]");
  if (!(lead_radius > 0.0 && point_radius > 0.0)) throw Error("arc radii must be positive");
  if (!(c >= 0.0)) throw Error("exploration constant must be nonnegative");
  if (l_target == 0 || l_real == 0) throw Error("l_target and l_real must be at least 1");
  if (extra_depth < 1 && max_depth <= 0) throw Error("extra_depth must be at least 1");
}

double node_score(std::size_t visits, double cum_cost, std::size_t parent_visits, double c) {
  if (visits == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(visits);
  const double parent = static_cast<double>(std::max<std::size_t>(parent_visits, 1));
  return -(cum_cost / n) + c * std::sqrt(std::log(parent) / n);
}

namespace {

std::size_t sample_count(const PlannerParams& params) {
  if (params.delta_theta <= 0.0 || params.theta_s <= 0.0) return 1;
  return static_cast<std::size_t>(std::floor(params.theta_s / params.delta_theta + 1e-9)) + 1;
}

}  // namespace

std::vector<Vec2> expansion_samples(const Vec2& human_pos, const Vec2& goal_pos, Behavior behavior,
                                    const PlannerParams& params) {
  const Vec2 axis = goal_pos - human_pos;
  if (!(axis.norm() > 0.0)) throw Error("expansion_samples: human is at the guide destination");
  const double heading = std::atan2(axis.y(), axis.x());
  const double r = params.radius(behavior);
  const std::size_t n = sample_count(params);
  // Centered so the arc stays symmetric about the axis when theta_s is not a multiple of delta_theta.
  const double first = -0.5 * static_cast<double>(n - 1) * params.delta_theta;
  std::vector<Vec2> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = heading + first + static_cast<double>(k) * params.delta_theta;
    out.emplace_back(human_pos.x() + r * std::cos(a), human_pos.y() + r * std::sin(a));
  }
  return out;
}

double distance_cost(std::span<const Vec2> target, std::span<const Vec2> real, std::size_t n_g) {
  if (target.empty() || real.empty()) throw Error("distance_cost: paths must be nonempty");
  const auto l_target = static_cast<long long>(target.size());
  const auto n = std::min<std::size_t>(std::max<std::size_t>(target.size(), n_g), real.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const long long idx = static_cast<long long>(i) + l_target - static_cast<long long>(n_g);
    const Vec2& p = idx < l_target ? target[static_cast<std::size_t>(std::max(idx, 0LL))] : target.back();
    sum += (p - real[i]).norm();
  }
  return sum;
}

double time_cost(std::size_t l_real, std::size_t n_g, double t_per_step) {
  if (l_real == 0) throw Error("time_cost: l_real must be at least 1");
  const std::size_t late = l_real - 1 > n_g ? l_real - 1 - n_g : 0;
  return t_per_step * static_cast<double>(late);
}

double affordance_cost(std::span<const Vec2> real, const Scene& scene, double c0) {
  std::size_t hits = 0;
  for (const Vec2& p : real) hits += in_affordance(p, scene) ? 1 : 0;
  return c0 * static_cast<double>(hits);
}

double final_cost(double c_dist, double c_time, double c_aff, const PlannerParams& params) {
  return params.w_d * c_dist / params.k_d + params.w_t * c_time + params.w_aff * c_aff;
}

double path_cost(std::span<const Vec2> target, std::span<const Vec2> real, std::size_t n_g, const Scene& scene,
                 const PlannerParams& params) {
  std::vector<Vec2> tgt(target.begin(), target.end());
  if (tgt.empty()) tgt.push_back(center_of(scene.guide_cell(), scene.map));
  while (tgt.size() < params.l_target) tgt.push_back(tgt.back());
  std::vector<Vec2> rl(real.begin(), real.end());
  if (rl.empty()) return 0.0;
  const double c_aff = affordance_cost(rl, scene, params.affordance_cost);
  const double c_time = time_cost(rl.size(), n_g, params.t_per_step);
  while (rl.size() < params.l_real) rl.push_back(rl.back());
  const double c_dist = distance_cost(tgt, rl, n_g);
  return final_cost(c_dist, c_time, c_aff, params);
}

Guidance guidance_for(Cell human, const Predictor& predictor, const PlannerParams& params) {
  (void)params;
  const Scene& scene = predictor.scene();
  const Cell goal = scene.guide_cell();
  const auto steps = mdp::min_steps(human, goal, scene.map, predictor.actions());
  if (!steps) throw Error("guide goal unreachable from the human cell");
  Guidance g;
  g.n_g = static_cast<std::size_t>(*steps);
  const mdp::ValueField& field = predictor.fields()[scene.guide_goal];
  for (const Cell& c : mdp::greedy_path(human, field, scene.map, predictor.actions(), 4 * scene.map.cell_count()))
    g.target.push_back(center_of(c, scene.map));
  return g;
}

void SearchTree::dump(std::ostream& out) const {
  struct Item {
    const SearchNode* node;
    long long parent;
  };
  std::vector<Item> stack{{&root, -1}};
  long long next_id = 0;
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    const long long id = next_id++;
    nlohmann::json rec{{"id", id},
                       {"parent", item.parent},
                       {"depth", item.node->depth},
                       {"behavior", item.node->depth == 0 ? "root" : std::string(to_string(item.node->behavior))},
                       {"sample", item.node->sample},
                       {"visits", item.node->visits}};
    if (item.node->visits) rec["mean_cost"] = item.node->mean_cost();
    else rec["mean_cost"] = nullptr;
    out << rec.dump() << '\n';
    for (auto it = item.node->children.rbegin(); it != item.node->children.rend(); ++it) stack.push_back({&*it, id});
  }
}

namespace {

class Search {
 public:
  Search(const SearchState& root, const Predictor& predictor, const PlannerParams& params, std::uint64_t seed)
      : root_(root), predictor_(predictor), params_(params), rng_(seed) {
    const Scene& scene = predictor.scene();
    goal_cell_ = scene.guide_cell();
    goal_pos_ = center_of(goal_cell_, scene.map);
    guidance_ = guidance_for(root.human.latest(), predictor, params);
    max_depth_ = params.max_depth > 0 ? params.max_depth : static_cast<int>(guidance_.n_g) + params.extra_depth;
    samples_ = sample_count(params);
    const double eps = 1e-9;
    hi_ = Vec2(scene.map.width() * scene.map.resolution() - eps, scene.map.height() * scene.map.resolution() - eps);
  }

  std::vector<Vec2> arc(const Vec2& human, Behavior b) const {
    std::vector<Vec2> pts = expansion_samples(human, goal_pos_, b, params_);
    for (Vec2& p : pts) p = p.cwiseMax(Vec2::Zero()).cwiseMin(hi_);
    return pts;
  }

  SearchNode& run(SearchTree& tree) {
    SearchNode& root = tree.root;
    root.depth = 0;
    root.human = root_.human.pose().position;
    root.robot = root_.robot;
    root.behavior = root_.behavior;
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    for (iterations_ = 0; iterations_ < params_.iterations; ++iterations_) {
      if (params_.wall_ms > 0.0 && iterations_ > 0 &&
          std::chrono::duration<double, std::milli>(clock::now() - start).count() >= params_.wall_ms)
        break;
      iterate(root);
    }
    return root;
  }

  std::size_t iterations() const { return iterations_; }
  int max_depth_reached() const { return deepest_; }
  const Guidance& guidance() const { return guidance_; }
  std::size_t samples() const { return samples_; }

 private:
  struct Rollout {
    HumanContext human;
    std::vector<Vec2> path;
    int depth = 0;
    bool done = false;
  };

  void advance(Rollout& st, Behavior b, std::size_t k, Vec2* robot_out) {
    const Vec2 human = st.human.pose().position;
    std::vector<Vec2> options = arc(human, b);
    const Vec2 robot = options[k];
    if (robot_out) *robot_out = robot;
    prediction::Prediction next;
    if ((robot - human).norm() > 1e-9) {
      const auto infl = predictor_.influence(st.human.pose(), robot, b, std::move(options));
      next = predictor_.predict_next(st.human, &infl, rng_);
    } else {
      next = predictor_.predict_next(st.human, nullptr, rng_);
    }
    st.human.observe(next.cell, next.position, params_.t_per_step);
    st.path.push_back(next.position);
    ++st.depth;
    st.done = next.cell == goal_cell_;
  }

  std::size_t select(const SearchNode& node) const {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const SearchNode& ch = node.children[i];
      const double s = node_score(ch.visits, ch.cum_cost, node.visits, params_.c);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    return best;
  }

  void expand(SearchNode& node) {
    node.children.reserve(prediction::kBehaviors.size() * samples_);
    for (Behavior b : prediction::kBehaviors)
      for (std::size_t k = 0; k < samples_; ++k) {
        SearchNode child;
        child.behavior = b;
        child.sample = k;
        child.depth = node.depth + 1;
        node.children.push_back(std::move(child));
      }
    deepest_ = std::max(deepest_, node.depth + 1);
  }

  void iterate(SearchNode& root) {
    Rollout st{root_.human, {}, 0, root_.human.latest() == goal_cell_};
    st.path.reserve(static_cast<std::size_t>(max_depth_));
    chain_.clear();
    chain_.push_back(&root);
    SearchNode* node = &root;
    while (!node->children.empty() && !st.done) {
      SearchNode& child = node->children[select(*node)];
      advance(st, child.behavior, child.sample, &child.robot);
      child.human = st.path.back();
      node = &child;
      chain_.push_back(node);
    }
    if (!st.done && st.depth < max_depth_ && (node->visits > 0 || node == &root)) {
      expand(*node);
      SearchNode& child = node->children.front();
      advance(st, child.behavior, child.sample, &child.robot);
      child.human = st.path.back();
      node = &child;
      chain_.push_back(node);
    }
    std::uniform_int_distribution<std::size_t> pick_behavior(0, prediction::kBehaviors.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_sample(0, samples_ - 1);
    while (!st.done && st.depth < max_depth_) {
      const Behavior b = prediction::kBehaviors[pick_behavior(rng_)];
      advance(st, b, pick_sample(rng_), nullptr);
    }
    const double cost = path_cost(guidance_.target, st.path, guidance_.n_g, predictor_.scene(), params_);
    for (SearchNode* n : chain_) {
      ++n->visits;
      n->cum_cost += cost;
    }
  }

  const SearchState& root_;
  const Predictor& predictor_;
  const PlannerParams& params_;
  Rng rng_;
  Cell goal_cell_;
  Vec2 goal_pos_;
  Vec2 hi_;
  Guidance guidance_;
  int max_depth_ = 0;
  int deepest_ = 0;
  std::size_t samples_ = 1;
  std::size_t iterations_ = 0;
  std::vector<SearchNode*> chain_;
};

}  // namespace

Plan plan_step(const SearchState& root, const Predictor& predictor, const PlannerParams& params, std::uint64_t seed,
               SearchTree* tree_out) {
  params.validate();
  if (params.iterations == 0) throw Error("no evaluated children");
  if (root.human.latest() == predictor.scene().guide_cell()) throw Error("plan_step: human already at the guide goal");
  Search search(root, predictor, params, seed);
  SearchTree local;
  SearchTree& tree = tree_out ? *tree_out : local;
  tree = SearchTree{};
  const SearchNode& top = search.run(tree);

  std::size_t best = top.children.size();
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < top.children.size(); ++i) {
    const SearchNode& ch = top.children[i];
    if (ch.visits == 0) continue;
    if (ch.mean_cost() < best_cost) {
      best_cost = ch.mean_cost();
      best = i;
    }
  }
  if (best == top.children.size()) throw Error("no evaluated children");

  const SearchNode& chosen = top.children[best];
  Plan plan;
  plan.behavior = chosen.behavior;
  plan.arc = search.arc(root.human.pose().position, chosen.behavior);
  plan.robot_target = plan.arc[chosen.sample];
  plan.expected_cost = best_cost;
  plan.child_index = best;
  plan.iterations = search.iterations();
  plan.max_depth_reached = search.max_depth_reached();
  plan.n_g = search.guidance().n_g;
  return plan;
}

}  // namespace guide::planner
