#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "guide/config.hpp"
#include "guide/experiment.hpp"
#include "support/oracles.hpp"

using namespace guide;

namespace {

const std::filesystem::path kRoot = GUIDE_SOURCE_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string detail = v.detail;
  if (secs >= budget_s) {
    v.pass = false;
    detail += " over time budget";
  }
  if (!v.pass) ++failures;
  std::printf("%s %-22s %7.2fs/%gs  %s\n", v.pass ? "PASS" : "FAIL", name, secs, budget_s, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct World {
  Scene scene;
  mdp::ActionSet actions = mdp::ActionSet::king_moves();
  mdp::MdpParams mdp;
  std::vector<mdp::ValueField> fields;

  explicit World(Scene s, mdp::MdpParams p = sim::SimConfig::default_mdp()) : scene(std::move(s)), mdp(p) {
    scene.index_affordance();
    fields = mdp::solve_all(scene.goals, scene.map, actions, mdp);
  }
  prediction::Predictor predictor(prediction::PredictionParams params = {}, prediction::BehaviorTable b = {}) const {
    return prediction::Predictor(scene, fields, actions, mdp, params, b);
  }
};

/// Random open map with a few obstacles; every goal is reachable from every free cell by construction
/// of the retry loop.
Scene random_scene(std::mt19937& rng) {
  std::uniform_int_distribution<int> size(4, 8);
  const int w = size(rng), h = size(rng);
  for (;;) {
    Scene s;
    s.name = "random";
    s.map = GridMap(w, h, 1.0);
    std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
    std::uniform_int_distribution<int> ng(1, 4), nocc(0, w * h / 6);
    for (int k = nocc(rng); k > 0; --k) s.map.set_occupied({xs(rng), ys(rng)});
    std::vector<Cell> free;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (!s.map.occupied({x, y})) free.push_back({x, y});
    if (free.size() < 6) continue;
    std::shuffle(free.begin(), free.end(), rng);
    const int goals = ng(rng);
    s.goals.assign(free.begin(), free.begin() + goals);
    s.guide_goal = 0;
    s.human_start = center_of(free[goals], s.map);
    s.robot_start = center_of(free[goals + 1], s.map);
    bool ok = true;
    for (const Cell& g : s.goals)
      for (const Cell& c : free) ok = ok && mdp::min_steps(c, g, s.map, mdp::ActionSet::king_moves()).has_value();
    if (ok) return s;
  }
}

struct Instance {
  prediction::HumanContext ctx;
  Vec2 robot;
  prediction::Behavior behavior;
  std::vector<Vec2> arc;
};

Instance random_instance(const Scene& s, std::mt19937& rng) {
  std::vector<Cell> free;
  for (int y = 0; y < s.map.height(); ++y)
    for (int x = 0; x < s.map.width(); ++x)
      if (!s.map.occupied({x, y})) free.push_back({x, y});
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Cell c = free[pick(rng)];
  prediction::HumanContext ctx(c, center_of(c, s.map), 2);
  for (int k = 0; k < 3; ++k) {
    const auto& a = mdp::ActionSet::king_moves()[pick(rng) % 9];
    const Cell n = mdp::transition(c, a, s.map);
    if (!s.map.occupied(n)) c = n;
    ctx.observe(c, center_of(c, s.map), 1.0);
  }
  Vec2 robot;
  do {
    robot = Vec2(unit(rng) * s.map.width(), unit(rng) * s.map.height());
  } while ((robot - ctx.pose().position).norm() < 0.3);
  std::vector<Vec2> arc{robot};
  for (int k = 0; k < 3; ++k) arc.emplace_back(unit(rng) * s.map.width(), unit(rng) * s.map.height());
  return {ctx, robot, unit(rng) < 0.5 ? prediction::Behavior::Lead : prediction::Behavior::Point, arc};
}

Verdict mdp_oracle() {
  std::mt19937 rng(2024);
  const mdp::ActionSet actions = mdp::ActionSet::king_moves();
  double worst = 0.0;
  std::size_t fields = 0;
  for (const mdp::MdpParams& p : {mdp::MdpParams{}, sim::SimConfig::default_mdp()})
    for (int w = 1; w <= 5; ++w)
      for (int h = 1; h <= 5; ++h)
        for (int rep = 0; rep < 3; ++rep) {
          GridMap map(w, h, 1.0);
          std::bernoulli_distribution occ(rep == 0 ? 0.0 : 0.25);
          for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
              if (occ(rng)) map.set_occupied({x, y});
          for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
              if (map.occupied({x, y})) continue;
              const auto ref = oracle::finite_horizon({x, y}, map, actions, p, 1e-10);
              const auto f = mdp::solve({x, y}, map, actions, p);
              for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(f.values()[i] - ref[i]));
              ++fields;
            }
        }

  mdp::MdpParams unit;
  unit.alpha = 0.0;
  const mdp::ActionSet corridor({{0.0, 0.0}, {1.0, 0.0}, {1.0, std::numbers::pi}});
  const auto c = mdp::solve({2, 0}, GridMap(3, 1, 1.0), corridor, unit);
  std::ostringstream printed;
  mdp::write_matrix(printed, c);
  const bool corridor_ok = printed.str() == "-1.9 -1 0\n" && std::abs(c.value({0, 0}) + 1.9) < 1e-6 &&
                           std::abs(c.value({1, 0}) + 1.0) < 1e-6 && c.value({2, 0}) == 0.0;
  return {worst < 2e-6 && corridor_ok,
          fmt("%g fields, max |V - V_dp| = %.2e, ", fields, worst) + "corridor " + printed.str().substr(0, 9)};
}

Verdict distributions() {
  std::mt19937 rng(99);
  double worst_sum = 0.0;
  int instances = 0;
  while (instances < 1000) {
    const World w(random_scene(rng));
    const auto pred = w.predictor();
    for (int k = 0; k < 10; ++k, ++instances) {
      const Instance in = random_instance(w.scene, rng);
      const auto infl = pred.influence(in.ctx.pose(), in.robot, in.behavior, in.arc);
      for (const auto* i : {&infl, static_cast<const prediction::RobotInfluence*>(nullptr)}) {
        double s = 0.0;
        for (double p : pred.goal_distribution(in.ctx, i).probs) s += p;
        worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        for (std::size_t g = 0; g < w.scene.goals.size(); ++g) {
          double a = 0.0;
          for (double p : pred.action_distribution(in.ctx.latest(), g, in.ctx.pose(), i).probs) a += p;
          worst_sum = std::max(worst_sum, std::abs(a - 1.0));
        }
      }
    }
  }

  double worst_tv = 0.0;
  int checked = 0;
  for (int n = 0; n < 100; ++n) {
    const World w(random_scene(rng));
    const auto pred = w.predictor();
    const Instance in = random_instance(w.scene, rng);
    const auto infl = pred.influence(in.ctx.pose(), in.robot, in.behavior, in.arc);
    const auto exact = oracle::mixture(pred, in.ctx, &infl);
    if (exact.size() > 12) continue;
    const auto sampled = pred.predict_next(in.ctx, &infl, 20000, std::uint64_t(n));
    std::map<std::size_t, double> empirical;
    for (const auto& [cell, count] : sampled.layer.counts) empirical[w.scene.map.index(cell)] += count / 20000.0;
    worst_tv = std::max(worst_tv, oracle::total_variation(exact, empirical));
    ++checked;
  }
  return {worst_sum < 1e-9 && worst_tv < 0.03 && checked >= 50,
          fmt("%g instances, max |sum - 1| = %.1e, ", instances, worst_sum) +
              fmt("max TV = %.4f over %g layers at K = 20000", worst_tv, checked)};
}

Verdict social_force() {
  using prediction::social_force;
  prediction::SocialParams p;
  double at_d = 0.0, spread = 0.0;
  for (double a = 0.0; a < 2 * std::numbers::pi; a += 0.25) {
    const Vec2 robot = p.d_social * Vec2(std::cos(a), std::sin(a)) + Vec2(1, 2);
    at_d = std::max(at_d, std::abs(social_force({{1, 2}, {1, 0}}, robot, p).norm() - 1.0));
    for (double phi = 0.0; phi < 2 * std::numbers::pi; phi += 0.25) {
      const Vec2 r = Vec2(1, 2) + 1.7 * Vec2(std::cos(a), std::sin(a));
      spread = std::max(spread, std::abs(social_force({{1, 2}, {std::cos(phi), std::sin(phi)}}, r, p).norm() -
                                         social_force({{1, 2}, {1, 0}}, r, p).norm()));
    }
  }
  p.lambda = 0.5;
  const double ratio = social_force({{0, 0}, {1, 0}}, {1.5, 0}, p).norm() /
                       social_force({{0, 0}, {-1, 0}}, {1.5, 0}, p).norm();
  return {at_d < 1e-12 && spread < 1e-12 && std::abs(ratio - 2.0) < 1e-12,
          fmt("|f| - 1 at d_social = %.1e, heading spread = %.1e, front/back = %.15g", at_d, spread, ratio)};
}

Verdict legibility() {
  std::mt19937 rng(5);
  int violations = 0, comparisons = 0, moved = 0, exact = 0;
  // Normalized probabilities carry rounding from the softmax, so ratios get a relative slack.
  // The weight formula itself, exp(arg / divisor), is compared exactly.
  const double slack = 1e-9;
  for (int n = 0; n < 200; ++n) {
    const World w(random_scene(rng));
    if (w.scene.goals.size() < 2) continue;
    const Instance in = random_instance(w.scene, rng);
    const Cell s = in.ctx.latest();
    if (s == w.scene.guide_cell()) continue;
    const std::size_t greedy = w.fields[0].greedy(s);
    const double e_other =
        0.5 * (w.fields[1].value(in.ctx.latest()) - w.fields[1].value(in.ctx.earliest()));
    const double e_guide =
        0.5 * (w.fields[0].value(in.ctx.latest()) - w.fields[0].value(in.ctx.earliest()));
    std::vector<double> prev_a;
    double prev_g = 0.0;
    std::vector<double> prev_formula;
    for (double xi : {1.5, 2.0, 4.0}) {
      prediction::BehaviorTable t;
      t.lead.legibility_gain = xi;
      t.point.legibility_gain = xi;
      const auto pred = w.predictor({}, t);
      const auto infl = pred.influence(in.ctx.pose(), in.robot, in.behavior, in.arc);
      const auto d = pred.action_distribution(s, 0, in.ctx.pose(), &infl);
      std::vector<double> wts;
      for (double p : d.probs) wts.push_back(p / d.probs[greedy]);
      const auto g = pred.goal_distribution(in.ctx, &infl);
      const double wg = g.probs[0] / g.probs[1] * std::exp(e_other);
      const double div = pred.divisor(in.ctx.pose(), infl);
      std::vector<double> formula;
      for (std::size_t a = 0; a < w.actions.size(); ++a) {
        const double q = mdp::revised_q(s, w.actions[a], w.fields[0], w.scene.map, w.mdp);
        formula.push_back(0.5 * (q - w.fields[0].value(s)));
      }
      formula.push_back(e_guide);
      for (std::size_t k = 0; k < formula.size(); ++k) {
        const double weight = std::exp(formula[k] / div);
        if (!prev_formula.empty()) {
          ++exact;
          if (formula[k] < 0 && weight < prev_formula[k]) ++violations;
          if (formula[k] > 0 && weight > prev_formula[k]) ++violations;
        }
        formula[k] = weight;
      }
      prev_formula = formula;
      if (!prev_a.empty()) {
        for (std::size_t a = 0; a < wts.size(); ++a) {
          const double q = mdp::revised_q(s, w.actions[a], w.fields[0], w.scene.map, w.mdp);
          const double arg = 0.5 * (q - w.fields[0].value(s));
          ++comparisons;
          if (arg < 0 && wts[a] < prev_a[a] * (1 - slack)) ++violations;
          if (arg > 0 && wts[a] > prev_a[a] * (1 + slack)) ++violations;
          moved += wts[a] > prev_a[a] * (1 + slack) ? 1 : 0;
        }
        ++comparisons;
        if (e_guide < 0 && wg < prev_g * (1 - slack)) ++violations;
        if (e_guide > 0 && wg > prev_g * (1 + slack)) ++violations;
      }
      prev_a = wts;
      prev_g = wg;
    }
  }
  return {violations == 0 && moved > 0,
          fmt("%g exact and %g distribution-level comparisons, %g violations", exact, comparisons, violations) +
              fmt(", %g in-fan weights raised", moved)};
}

Scene small_scene() {
  Scene s;
  s.name = "small";
  s.map = GridMap(5, 3, 1.0);
  s.goals = {{4, 1}, {4, 0}};
  s.affordance_cells = {{1, 1}, {1, 0}};
  s.human_start = {0.5, 1.5};
  s.robot_start = {1.5, 1.5};
  return s;
}

prediction::PredictionParams committed() { return sim::SimConfig::committed(); }

Verdict node_score() {
  const double spot = planner::node_score(2, 4.0, 10, 1.0);
  const double expected = -2.0 + std::sqrt(std::log(10.0) / 2.0);
  bool order = std::isinf(planner::node_score(0, 0.0, 10, 1.0));
  const World w(small_scene());
  const auto pred = w.predictor(committed());
  const Cell c = cell_of(w.scene.human_start, w.scene.map);
  const planner::SearchState root{prediction::HumanContext(c, w.scene.human_start, 2), w.scene.robot_start,
                                  prediction::Behavior::Lead};
  for (std::size_t n = 1; n <= 8; ++n) {
    planner::PlannerParams p;
    p.iterations = n;
    planner::SearchTree tree;
    planner::plan_step(root, pred, p, 1, &tree);
    for (std::size_t i = 0; i < tree.root.children.size(); ++i)
      order = order && tree.root.children[i].visits == (i < n ? 1u : 0u);
  }
  return {std::abs(spot - expected) < 1e-12 && order,
          fmt("score(2, 4, 10, 1) = %.15f, expected %.15f", spot, expected) +
              (order ? ", unvisited first in index order" : ", expansion order wrong")};
}

Verdict cost_suite() {
  const planner::PlannerParams p;
  bool ok = planner::final_cost(100, 2, 10, p) == 13.0;
  for (std::size_t n_g = 0; n_g < 8; ++n_g) {
    ok = ok && planner::time_cost(n_g + 4, n_g, 0.7) == 3 * 0.7;
    ok = ok && planner::time_cost(n_g + 1, n_g, 0.7) == 0.0;
  }
  Scene s = small_scene();
  s.map = GridMap(10, 2, 1.0);
  s.affordance_cells = {{3, 0}, {6, 1}};
  s.index_affordance();
  const std::vector<Vec2> real{{0.5, 0.5}, {3.5, 0.5}, {4.5, 0.5}, {6.1, 1.9}, {9.5, 1.5}};
  ok = ok && planner::affordance_cost(real, s, 10.0) == 20.0;
  const std::vector<Vec2> target{{0, 0}, {1, 0}, {2, 0}};
  const std::vector<Vec2> walked{{0, 1}, {0, 2}, {0, 0}, {1, 1}, {5, 0}};
  const double d = planner::distance_cost(target, walked, 5);
  ok = ok && std::abs(d - 7.0) < 1e-12;
  const std::vector<Vec2> one{{2.0, 0.7}};
  const std::vector<Vec2> aligned{{2.0, 0.0}};
  ok = ok && std::abs(planner::distance_cost(aligned, one, 1) - 0.7) < 1e-12;
  return {ok, fmt("final 13, time 3t, affordance 20, distance %.12g / 7, aligned 0.7", d)};
}

Verdict mcts_vs_exhaustive() {
  const World w(small_scene());
  const auto pred = w.predictor(committed());
  const Cell c = cell_of(w.scene.human_start, w.scene.map);
  const planner::SearchState root{prediction::HumanContext(c, w.scene.human_start, 2), w.scene.robot_start,
                                  prediction::Behavior::Lead};
  planner::PlannerParams p;
  p.max_depth = 2;
  p.iterations = 50000;
  const auto values = oracle::depth2_values(pred, root, p);
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto plan = planner::plan_step(root, pred, p, seed);
    hits += values[plan.child_index] <= sorted[0] + 1e-9 ? 1 : 0;
  }
  return {hits >= 95, fmt("%g/100 seeds pick the depth-2 optimum (%.4f, runner-up %.4f)", hits, sorted[0], sorted[1])};
}

struct Batch {
  std::vector<std::unique_ptr<sim::Environment>> envs;
  std::vector<const sim::Environment*> ptrs;
  experiment::ExperimentSpec spec;
};

Batch load_batch(const std::filesystem::path& config_path) {
  const auto cfg = config::load_run_config(config_path);
  Batch b;
  for (const auto& path : cfg.scene_paths()) {
    b.envs.push_back(std::make_unique<sim::Environment>(load_scene_file(path), cfg.sim));
    b.ptrs.push_back(b.envs.back().get());
  }
  b.spec.methods = cfg.methods;
  b.spec.trials = cfg.trials;
  b.spec.seed_base = cfg.seed_base;
  return b;
}

Verdict scenes() {
  Batch b = load_batch(kRoot / "configs" / "default.json");
  const auto result = experiment::run_experiment(b.ptrs, b.spec);
  bool ok = true;
  std::string detail;
  for (const auto& env : b.envs) {
    const std::string& name = env->scene().name;
    const experiment::Aggregate *pl = nullptr, *lo = nullptr;
    for (const auto& a : result.aggregates)
      if (a.scene == name) (a.method == sim::Method::Planner ? pl : lo) = &a;
    if (!pl || !lo) return {false, "missing aggregate for " + name};
    ok = ok && pl->trials == 50 && pl->success_rate >= 0.95 && pl->intimate_free >= 0.9;
    if (name != "scene_a") ok = ok && pl->ambiguity_ratio < lo->ambiguity_ratio;
    detail += name + fmt(" succ %.2f amb %.4f vs lead %.4f", pl->success_rate, pl->ambiguity_ratio, lo->ambiguity_ratio) +
              fmt(" d_i-free %.2f; ", pl->intimate_free);
  }
  return {ok, detail};
}

Verdict determinism() {
  Batch b = load_batch(kRoot / "configs" / "default.json");
  b.spec.trials = 3;
  b.spec.keep_logs = true;
  auto bytes = [](const experiment::ExperimentResult& r) {
    std::ostringstream out;
    experiment::write_results_table(out, r);
    out << experiment::summary(r).dump(2);
    for (const auto& log : r.logs) experiment::write_log(out, log);
    return out.str();
  };
  const std::string first = bytes(experiment::run_experiment(b.ptrs, b.spec, mdp::Execution::Parallel));
  const std::string second = bytes(experiment::run_experiment(b.ptrs, b.spec, mdp::Execution::Parallel));
  const std::string serial = bytes(experiment::run_experiment(b.ptrs, b.spec, mdp::Execution::Serial));
  std::string detail = std::to_string(first.size()) + " bytes of results and logs; repeat ";
  detail += first == second ? "identical" : "differs";
  detail += ", serial ";
  detail += first == serial ? "identical" : "differs";
  return {first == second && first == serial, detail};
}

}  // namespace

int main() {
  criterion("mdp_oracle", 5, mdp_oracle);
  criterion("distributions", 30, distributions);
  criterion("social_force", 1, social_force);
  criterion("legibility", 30, legibility);
  criterion("node_score", 5, node_score);
  criterion("cost_suite", 1, cost_suite);
  criterion("mcts_vs_exhaustive", 120, mcts_vs_exhaustive);
  criterion("scenes_abc", 600, scenes);
  criterion("determinism", 120, determinism);
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
