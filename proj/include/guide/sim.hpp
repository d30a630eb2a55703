#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guide/planner.hpp"

namespace guide::sim {

using planner::Behavior;
using prediction::Rng;

enum class Method { Planner, LeadOnly };
std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

enum class Outcome { Success, Timeout, Aborted };
std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view name);

struct SimConfig {
  mdp::MdpParams mdp = default_mdp();
  // Both the planner's model and the simulated visitor take the guide destination as known.
  prediction::PredictionParams prediction = committed();  // planner's model of the human
  prediction::PredictionParams agent = committed();       // simulated visitor
  prediction::BehaviorTable behaviors;
  planner::PlannerParams planner;

  void validate() const;

  static mdp::MdpParams default_mdp() {
    mdp::MdpParams p;
    p.effort_cost = 20.0;
    return p;
  }
  static prediction::PredictionParams committed() {
    prediction::PredictionParams p;
    p.guide_goal_only = true;
    return p;
  }
};

/// Scene plus everything solved from it. Shared read-only by concurrent trials.
class Environment {
 public:
  Environment(Scene scene, SimConfig config, mdp::Execution execution = mdp::Execution::Parallel);
  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  const Scene& scene() const { return scene_; }
  const SimConfig& config() const { return config_; }
  const mdp::ActionSet& actions() const { return actions_; }
  std::span<const mdp::ValueField> fields() const { return fields_; }
  const prediction::Predictor& planner_model() const { return *planner_model_; }
  const prediction::Predictor& agent_model() const { return *agent_model_; }
  /// Nodes-to-go from the scene's human start.
  std::size_t start_nodes_to_go() const { return start_n_g_; }
  /// Scene limit, or 3 * n_g * t_per_step when the scene leaves it unset.
  double time_limit() const;

 private:
  Scene scene_;
  SimConfig config_;
  mdp::ActionSet actions_;
  std::vector<mdp::ValueField> fields_;
  std::unique_ptr<prediction::Predictor> planner_model_;
  std::unique_ptr<prediction::Predictor> agent_model_;
  std::size_t start_n_g_ = 0;
};

struct StepRecord {
  double time = 0.0;
  Vec2 human = Vec2::Zero();
  Vec2 robot = Vec2::Zero();
  Behavior behavior = Behavior::Lead;
  double distance = 0.0;
  bool in_affordance = false;
};

struct TrialLog {
  std::string scene;
  std::string method;
  std::string agent;
  std::uint64_t seed = 0;
  double t_per_step = 1.0;
  std::vector<StepRecord> steps;
  Outcome outcome = Outcome::Timeout;
};

struct Metrics {
  bool success = false;
  double ambiguity_ratio = 0.0;
  double discomfort_ratio_p = 0.0;
  double discomfort_ratio_i = 0.0;
};

inline constexpr double kPersonalDistance = 1.2;
inline constexpr double kIntimateDistance = 0.45;

Metrics compute_metrics(const TrialLog& log, double d_p = kPersonalDistance, double d_i = kIntimateDistance);

/// What a simulated human sees when choosing its next position.
struct AgentView {
  const Environment& env;
  const prediction::HumanContext& human;
  Vec2 robot;
  Behavior behavior;
  std::span<const Vec2> arc;  // the robot's current position options
  std::size_t step;
};

class HumanAgent {
 public:
  virtual ~HumanAgent() = default;
  virtual std::string_view kind() const = 0;
  virtual Vec2 next_position(const AgentView& view, Rng& rng) = 0;
};

/// Samples its next cell from the prediction module under the robot's current influence.
class ModelDrivenAgent final : public HumanAgent {
 public:
  std::string_view kind() const override { return "model"; }
  Vec2 next_position(const AgentView& view, Rng& rng) override;
};

/// Walks a fixed waypoint list at constant speed with Gaussian position noise.
class ScriptedAgent final : public HumanAgent {
 public:
  ScriptedAgent(std::vector<Vec2> waypoints, double speed, double noise_sigma = 0.0);
  std::string_view kind() const override { return "scripted"; }
  Vec2 next_position(const AgentView& view, Rng& rng) override;

 private:
  std::vector<Vec2> waypoints_;
  std::size_t next_ = 0;
  double speed_;
  double noise_;
};

/// Position driven by externally pushed velocity intents; holds still without input.
class InteractiveAgent final : public HumanAgent {
 public:
  explicit InteractiveAgent(double speed) : speed_(speed) {}
  std::string_view kind() const override { return "interactive"; }
  /// Intent is a direction; its norm is clamped to 1 and scaled by the agent speed.
  void push_intent(const Vec2& direction) { intent_ = direction; }
  Vec2 next_position(const AgentView& view, Rng& rng) override;

 private:
  double speed_;
  std::optional<Vec2> intent_;
};

/// Stepwise closed-loop trial. Each step plans (or applies the baseline), moves the robot
/// towards its target under the behavior's speed limit, then lets the agent move.
class Trial {
 public:
  Trial(const Environment& env, Method method, HumanAgent& agent, std::uint64_t seed);

  bool done() const { return done_; }
  void step();
  /// Ends an unfinished trial with outcome Aborted.
  void abort();
  const TrialLog& log() const { return log_; }
  const prediction::HumanContext& human() const { return human_; }
  Vec2 robot() const { return robot_; }
  Behavior behavior() const { return behavior_; }
  /// Planner's predicted next-position layer for the latest step (only when enabled).
  const std::optional<prediction::Layer>& layer() const { return layer_; }
  void record_layers(bool enabled) { record_layers_ = enabled; }
  /// Overrides the planner budget for this trial.
  void set_planner(const planner::PlannerParams& params) { planner_ = params; }

 private:
  void record();

  const Environment& env_;
  Method method_;
  HumanAgent& agent_;
  planner::PlannerParams planner_;
  Rng plan_rng_;
  Rng agent_rng_;
  prediction::HumanContext human_;
  Vec2 robot_;
  Behavior behavior_ = Behavior::Lead;
  std::size_t step_ = 0;
  std::size_t max_steps_ = 0;
  bool done_ = false;
  bool record_layers_ = false;
  std::optional<prediction::Layer> layer_;
  TrialLog log_;
};

TrialLog run_trial(const Environment& env, Method method, HumanAgent& agent, std::uint64_t seed);

/// Lead-only comparator with a model-driven visitor.
TrialLog lead_only_baseline(const Environment& env, std::uint64_t seed);

}  // namespace guide::sim
