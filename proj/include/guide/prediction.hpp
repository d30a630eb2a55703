#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "guide/mdp.hpp"
#include "guide/world.hpp"

namespace guide::prediction {

using Rng = std::mt19937_64;

enum class Behavior : std::uint8_t { Lead = 0, Point = 1 };
inline constexpr std::array<Behavior, 2> kBehaviors{Behavior::Lead, Behavior::Point};

std::string_view to_string(Behavior b);
Behavior behavior_from_string(std::string_view name);

struct BehaviorProfile {
  double legibility_gain;  // xi > 1
  double move_speed;       // m/s
};

struct BehaviorTable {
  BehaviorProfile lead{2.0, 2.0};
  BehaviorProfile point{4.0, 1.2};

  const BehaviorProfile& operator[](Behavior b) const { return b == Behavior::Lead ? lead : point; }
  void validate() const;
};

struct SocialParams {
  double d_social = 2.0;
  double k_n = 1.0;
  double lambda = 1.0;

  void validate() const;
};

/// Force exerted by the robot on the human; points from the human towards the robot.
/// A still human is treated as facing the robot (cos phi = 1).
Vec2 social_force(const Pose& human, const Vec2& robot_pos, const SocialParams& params);

/// Sliding window of the last l+1 observed cells plus the current pose.
class HumanContext {
 public:
  HumanContext(Cell start, const Vec2& position, std::size_t history_length);

  /// Shifts the window by one step; velocity is the displacement over dt.
  void observe(Cell cell, const Vec2& position, double dt);

  Cell latest() const { return history_.back(); }
  Cell earliest() const { return history_.front(); }
  const Pose& pose() const { return pose_; }
  std::span<const Cell> history() const { return history_; }

 private:
  std::vector<Cell> history_;
  Pose pose_;
};

struct RobotInfluence {
  Vec2 position = Vec2::Zero();
  Behavior behavior = Behavior::Lead;
  std::vector<Vec2> candidates;
  Fan impact_area;

  /// Appends `position` to the candidates when it is not already one of them.
  static RobotInfluence make(const Vec2& human_pos, const Vec2& robot_pos, Behavior behavior,
                             std::vector<Vec2> candidates, double theta_m, double r_min, double r_max);
};

template <class T>
struct Distribution {
  std::vector<T> support;
  std::vector<double> probs;
};

/// xi * (1 + f_i / sum_k f_k).
double legibility_divisor(double xi, double force_i, double force_sum);

enum class AdvantageBaseline {
  CurrentState,   // Q~(s,a) - V(s)
  Successor,      // Q~(s,a) - V(s'), the literal successor-state reading
};

struct PredictionParams {
  double beta_g = 0.5;
  double beta_a = 0.5;
  double theta_m = 1.0471975511965976;  // pi/3
  double impact_radius = 5.0;           // m
  std::size_t history_length = 2;       // l
  std::size_t samples = 20;             // K
  AdvantageBaseline baseline = AdvantageBaseline::CurrentState;
  bool guide_goal_only = false;
  SocialParams social;

  void validate() const;
};

/// Counts of the K sampled next cells.
struct Layer {
  std::vector<std::pair<Cell, std::uint32_t>> counts;
  std::uint32_t total = 0;

  /// Normalized per-cell frequencies over the whole map (row-major).
  std::vector<double> dense(const GridMap& map) const;
};

struct Prediction {
  Cell cell;
  Vec2 position;
  Layer layer;
};

/// Sampling-based next-position predictor. Holds references to the scene and solved fields,
/// which must outlive it.
class Predictor {
 public:
  Predictor(const Scene& scene, std::span<const mdp::ValueField> fields, const mdp::ActionSet& actions,
            const mdp::MdpParams& mdp, PredictionParams params, BehaviorTable behaviors = {});

  const Scene& scene() const { return *scene_; }
  const mdp::ActionSet& actions() const { return *actions_; }
  const mdp::MdpParams& mdp_params() const { return mdp_; }
  const PredictionParams& params() const { return params_; }
  const BehaviorTable& behaviors() const { return behaviors_; }
  std::span<const mdp::ValueField> fields() const { return fields_; }

  /// Builds the influence for a robot at `robot_pos` whose position options are `candidates`.
  RobotInfluence influence(const Pose& human, const Vec2& robot_pos, Behavior behavior,
                           std::vector<Vec2> candidates) const;

  /// xi(behavior) * (1 + f_i / sum_k f_k) for the human pose.
  double divisor(const Pose& human, const RobotInfluence& influence) const;

  Distribution<std::size_t> goal_distribution(const HumanContext& ctx, const RobotInfluence* influence) const;

  /// Support is action indices in action-set order.
  Distribution<std::size_t> action_distribution(Cell s, std::size_t goal, const Pose& human,
                                                const RobotInfluence* influence) const;

  Prediction predict_next(const HumanContext& ctx, const RobotInfluence* influence, std::size_t samples,
                          Rng& rng) const;
  Prediction predict_next(const HumanContext& ctx, const RobotInfluence* influence, Rng& rng) const {
    return predict_next(ctx, influence, params_.samples, rng);
  }
  Prediction predict_next(const HumanContext& ctx, const RobotInfluence* influence, std::size_t samples,
                          std::uint64_t seed) const;

 private:
  void action_weights(Cell s, std::size_t goal, const RobotInfluence* influence, double divisor,
                      std::span<double> probs) const;

  const Scene* scene_;
  std::span<const mdp::ValueField> fields_;
  const mdp::ActionSet* actions_;
  mdp::MdpParams mdp_;
  PredictionParams params_;
  BehaviorTable behaviors_;
};

/// Inverse-CDF draw from normalized probabilities; returns an index.
std::size_t sample_index(std::span<const double> probs, Rng& rng);

}  // namespace guide::prediction
