#include "guide/sim.hpp"

#include <algorithm>
#include <cmath>

namespace guide::sim {

std::string_view to_string(Method m) { return m == Method::Planner ? "planner" : "lead_only"; }

Method method_from_string(std::string_view name) {
  if (name == "planner") return Method::Planner;
  if (name == "lead_only") return Method::LeadOnly;
  throw Error("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Timeout: return "timeout";
    case Outcome::Aborted: return "aborted";
  }
  return "timeout";
}

Outcome outcome_from_string(std::string_view name) {
  if (name == "success") return Outcome::Success;
  if (name == "timeout") return Outcome::Timeout;
  if (name == "aborted") return Outcome::Aborted;
  throw Error("unknown outcome '" + std::string(name) + "'");
}

void SimConfig::validate() const {
  mdp.validate();
  prediction.validate();
  agent.validate();
  behaviors.validate();
  planner.validate();
  if (prediction.history_length != agent.history_length)
    throw Error("planner and agent models must share the history length l");
}

Environment::Environment(Scene scene, SimConfig config, mdp::Execution execution)
    : scene_(std::move(scene)), config_(config), actions_(mdp::ActionSet::king_moves()) {
  config_.validate();
  scene_.validate();
  scene_.index_affordance();
  fields_ = mdp::solve_all(scene_.goals, scene_.map, actions_, config_.mdp, execution);
  planner_model_ = std::make_unique<prediction::Predictor>(scene_, fields_, actions_, config_.mdp,
                                                           config_.prediction, config_.behaviors);
  agent_model_ = std::make_unique<prediction::Predictor>(scene_, fields_, actions_, config_.mdp, config_.agent,
                                                         config_.behaviors);
  const auto n_g = mdp::min_steps(cell_of(scene_.human_start, scene_.map), scene_.guide_cell(), scene_.map, actions_);
  if (!n_g) throw Error("guide goal enclosed: unreachable from human_start");
  start_n_g_ = static_cast<std::size_t>(*n_g);
}

double Environment::time_limit() const {
  if (scene_.time_limit_s > 0.0) return scene_.time_limit_s;
  return 3.0 * static_cast<double>(start_n_g_) * config_.planner.t_per_step;
}

Metrics compute_metrics(const TrialLog& log, double d_p, double d_i) {
  Metrics m;
  m.success = log.outcome == Outcome::Success;
  if (log.steps.empty()) return m;
  std::size_t amb = 0, personal = 0, intimate = 0;
  for (const StepRecord& r : log.steps) {
    amb += r.in_affordance ? 1 : 0;
    personal += r.distance < d_p ? 1 : 0;
    intimate += r.distance < d_i ? 1 : 0;
  }
  const double n = static_cast<double>(log.steps.size());
  m.ambiguity_ratio = amb / n;
  m.discomfort_ratio_p = personal / n;
  m.discomfort_ratio_i = intimate / n;
  return m;
}

namespace {

Vec2 clamp_to_map(const Vec2& p, const GridMap& map) {
  const double eps = 1e-9;
  return {std::clamp(p.x(), 0.0, map.width() * map.resolution() - eps),
          std::clamp(p.y(), 0.0, map.height() * map.resolution() - eps)};
}

Rng derive_seed(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  return Rng(seq);
}

}  // namespace

Vec2 ModelDrivenAgent::next_position(const AgentView& view, Rng& rng) {
  const prediction::Predictor& model = view.env.agent_model();
  const Pose& pose = view.human.pose();
  if ((view.robot - pose.position).norm() <= 1e-9) return model.predict_next(view.human, nullptr, rng).position;
  const auto infl = model.influence(pose, view.robot, view.behavior, {view.arc.begin(), view.arc.end()});
  return model.predict_next(view.human, &infl, rng).position;
}

ScriptedAgent::ScriptedAgent(std::vector<Vec2> waypoints, double speed, double noise_sigma)
    : waypoints_(std::move(waypoints)), speed_(speed), noise_(noise_sigma) {
  if (!(speed > 0.0)) throw Error("scripted agent: speed must be positive");
  if (!(noise_sigma >= 0.0)) throw Error("scripted agent: noise must be nonnegative");
}

Vec2 ScriptedAgent::next_position(const AgentView& view, Rng& rng) {
  Vec2 p = view.human.pose().position;
  double budget = speed_ * view.env.config().planner.t_per_step;
  while (next_ < waypoints_.size() && budget > 0.0) {
    const Vec2 d = waypoints_[next_] - p;
    const double len = d.norm();
    if (len <= budget) {
      p = waypoints_[next_++];
      budget -= len;
    } else {
      p += d / len * budget;
      budget = 0.0;
    }
  }
  if (noise_ > 0.0) {
    std::normal_distribution<double> n(0.0, noise_);
    p += Vec2(n(rng), n(rng));
  }
  return clamp_to_map(p, view.env.scene().map);
}

Vec2 InteractiveAgent::next_position(const AgentView& view, Rng&) {
  Vec2 p = view.human.pose().position;
  if (intent_) {
    Vec2 dir = *intent_;
    const double n = dir.norm();
    if (n > 1.0) dir /= n;
    p += dir * speed_ * view.env.config().planner.t_per_step;
    intent_.reset();
  }
  return clamp_to_map(p, view.env.scene().map);
}

Trial::Trial(const Environment& env, Method method, HumanAgent& agent, std::uint64_t seed)
    : env_(env),
      method_(method),
      agent_(agent),
      planner_(env.config().planner),
      plan_rng_(seed),
      agent_rng_(derive_seed(seed)),
      human_(cell_of(env.scene().human_start, env.scene().map), env.scene().human_start,
             env.config().prediction.history_length),
      robot_(env.scene().robot_start) {
  log_.scene = env.scene().name;
  log_.method = std::string(to_string(method));
  log_.agent = std::string(agent.kind());
  log_.seed = seed;
  log_.t_per_step = env.config().planner.t_per_step;
  max_steps_ = static_cast<std::size_t>(std::floor(env.time_limit() / log_.t_per_step + 1e-9));
  record();
  if (human_.latest() == env.scene().guide_cell()) {
    done_ = true;
    log_.outcome = Outcome::Success;
  } else if (max_steps_ == 0) {
    done_ = true;
    log_.outcome = Outcome::Timeout;
  }
}

void Trial::record() {
  StepRecord r;
  r.time = static_cast<double>(step_) * log_.t_per_step;
  r.human = human_.pose().position;
  r.robot = robot_;
  r.behavior = behavior_;
  r.distance = (r.human - r.robot).norm();
  r.in_affordance = in_affordance(r.human, env_.scene());
  log_.steps.push_back(r);
}

void Trial::step() {
  if (done_) return;
  const Scene& scene = env_.scene();
  const Vec2 goal = center_of(scene.guide_cell(), scene.map);
  const Vec2 human = human_.pose().position;

  Vec2 target;
  std::vector<Vec2> arc;
  if (method_ == Method::Planner) {
    const planner::SearchState state{human_, robot_, behavior_};
    const planner::Plan plan = planner::plan_step(state, env_.planner_model(), planner_, plan_rng_());
    behavior_ = plan.behavior;
    target = plan.robot_target;
    arc = plan.arc;
  } else {
    behavior_ = Behavior::Lead;
    // Point on the guide goal's greedy path about one lead radius ahead of the human.
    const auto& field = env_.fields()[scene.guide_goal];
    const auto path = mdp::greedy_path(human_.latest(), field, scene.map, env_.actions(), scene.map.cell_count());
    const auto ahead = static_cast<std::size_t>(
        std::max(1.0, std::round(planner_.lead_radius / scene.map.resolution())));
    target = path.empty() ? goal : center_of(path[std::min(ahead, path.size()) - 1], scene.map);
    if ((human - goal).norm() > 0.0) {
      arc = planner::expansion_samples(human, goal, Behavior::Lead, planner_);
      for (Vec2& p : arc) p = clamp_to_map(p, scene.map);
    }
  }

  const double reach = env_.config().behaviors[behavior_].move_speed * log_.t_per_step;
  const Vec2 move = target - robot_;
  robot_ = move.norm() <= reach ? target : Vec2(robot_ + move / move.norm() * reach);

  const AgentView view{env_, human_, robot_, behavior_, arc, step_};
  const Vec2 next = clamp_to_map(agent_.next_position(view, agent_rng_), scene.map);

  if (record_layers_ && (robot_ - human).norm() > 1e-9) {
    const auto infl = env_.planner_model().influence(human_.pose(), robot_, behavior_, arc);
    Rng layer_rng(plan_rng_());
    layer_ = env_.planner_model().predict_next(human_, &infl, layer_rng).layer;
  }

  human_.observe(cell_of(next, scene.map), next, log_.t_per_step);
  ++step_;
  record();
  if (human_.latest() == scene.guide_cell()) {
    done_ = true;
    log_.outcome = Outcome::Success;
  } else if (step_ >= max_steps_) {
    done_ = true;
    log_.outcome = Outcome::Timeout;
  }
}

void Trial::abort() {
  if (done_) return;
  done_ = true;
  log_.outcome = Outcome::Aborted;
}

TrialLog run_trial(const Environment& env, Method method, HumanAgent& agent, std::uint64_t seed) {
  Trial trial(env, method, agent, seed);
  while (!trial.done()) trial.step();
  return trial.log();
}

TrialLog lead_only_baseline(const Environment& env, std::uint64_t seed) {
  ModelDrivenAgent agent;
  return run_trial(env, Method::LeadOnly, agent, seed);
}

}  // namespace guide::sim
