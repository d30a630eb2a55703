#include "guide/prediction.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <optional>

namespace guide::prediction {

std::string_view to_string(Behavior b) { return b == Behavior::Lead ? "lead" : "point"; }

Behavior behavior_from_string(std::string_view name) {
  if (name == "lead") return Behavior::Lead;
  if (name == "point") return Behavior::Point;
  throw Error("unknown behavior '" + std::string(name) + "'");
}

void BehaviorTable::validate() const {
  for (const BehaviorProfile* p : {&lead, &point}) {
    if (!(p->legibility_gain > 1.0)) throw Error("legibility gain must exceed 1");
    if (!(p->move_speed > 0.0)) throw Error("behavior move speed must be positive");
  }
  if (point.move_speed > lead.move_speed) throw Error("point speed must not exceed lead speed");
}

void SocialParams::validate() const {
  if (!(d_social > 0.0)) throw Error("d_social must be positive");
  if (!(k_n > 0.0)) throw Error("k_n must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("lambda must lie in [0, 1]");
}

void PredictionParams::validate() const {
  social.validate();
  if (!(beta_g >= 0.0) || !(beta_a >= 0.0)) throw Error("beta must be nonnegative");
  if (!(theta_m >= 0.0 && theta_m <= std::numbers::pi)) throw Error("theta_m must lie in [0, pi]");
  if (!(impact_radius > 0.0)) throw Error("impact radius must be positive");
  if (samples == 0) throw Error("K must be at least 1");
}

Vec2 social_force(const Pose& human, const Vec2& robot_pos, const SocialParams& params) {
  const Vec2 offset = robot_pos - human.position;
  const double d = offset.norm();
  if (!(d > 0.0)) throw Error("social_force: human and robot positions coincide");
  const Vec2 n = offset / d;
  const double speed = human.velocity.norm();
  const double cos_phi = speed > 0.0 ? human.velocity.dot(n) / speed : 1.0;
  const double anisotropy = params.lambda + (1.0 - params.lambda) * (1.0 + cos_phi) / 2.0;
  return std::exp((d - params.d_social) / params.k_n) * anisotropy * n;
}

HumanContext::HumanContext(Cell start, const Vec2& position, std::size_t history_length)
    : history_(history_length + 1, start), pose_{position, Vec2::Zero()} {}

void HumanContext::observe(Cell cell, const Vec2& position, double dt) {
  std::rotate(history_.begin(), history_.begin() + 1, history_.end());
  history_.back() = cell;
  pose_.velocity = dt > 0.0 ? Vec2((position - pose_.position) / dt) : Vec2::Zero();
  pose_.position = position;
}

RobotInfluence RobotInfluence::make(const Vec2& human_pos, const Vec2& robot_pos, Behavior behavior,
                                    std::vector<Vec2> candidates, double theta_m, double r_min, double r_max) {
  const bool listed = std::any_of(candidates.begin(), candidates.end(),
                                  [&](const Vec2& c) { return (c - robot_pos).norm() <= 1e-9; });
  if (!listed) candidates.push_back(robot_pos);
  const Vec2 axis = robot_pos - human_pos;
  if (!(axis.norm() > 0.0)) throw Error("robot influence: robot coincides with human");
  return RobotInfluence{robot_pos, behavior, std::move(candidates), Fan::make(human_pos, axis, theta_m, r_min, r_max)};
}

double legibility_divisor(double xi, double force_i, double force_sum) {
  if (!(force_sum > 0.0)) throw Error("legibility divisor: force sum must be positive");
  return xi * (1.0 + force_i / force_sum);
}

std::vector<double> Layer::dense(const GridMap& map) const {
  std::vector<double> out(map.cell_count(), 0.0);
  if (total == 0) return out;
  for (const auto& [cell, count] : counts) out[map.index(cell)] += static_cast<double>(count) / total;
  return out;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u beyond the accumulated mass: fall back to the last nonzero entry.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return 0;
}

namespace {

// Normalizes exp(exponents) in place; exponent overflow/underflow of every entry is degenerate.
void normalize_exponents(std::span<double> values, const char* what) {
  double top = -std::numeric_limits<double>::infinity();
  for (double e : values) {
    if (std::isnan(e)) throw Error(std::string("degenerate ") + what + " weights");
    top = std::max(top, e);
  }
  if (!std::isfinite(top) || top < std::log(DBL_MIN)) throw Error(std::string("degenerate ") + what + " weights");
  double sum = 0.0;
  for (double& e : values) {
    e = std::exp(e - top);
    sum += e;
  }
  for (double& e : values) e /= sum;
}

}  // namespace

Predictor::Predictor(const Scene& scene, std::span<const mdp::ValueField> fields, const mdp::ActionSet& actions,
                     const mdp::MdpParams& mdp, PredictionParams params, BehaviorTable behaviors)
    : scene_(&scene), fields_(fields), actions_(&actions), mdp_(mdp), params_(params), behaviors_(behaviors) {
  params_.validate();
  behaviors_.validate();
  if (fields_.size() != scene.goals.size()) throw Error("predictor: need one value field per goal");
  for (std::size_t g = 0; g < fields_.size(); ++g)
    if (fields_[g].goal() != scene.goals[g]) throw Error("predictor: value field goal mismatch");
}

RobotInfluence Predictor::influence(const Pose& human, const Vec2& robot_pos, Behavior behavior,
                                    std::vector<Vec2> candidates) const {
  // r_min of half a cell keeps the apex (the stay successor) outside the impact area.
  return RobotInfluence::make(human.position, robot_pos, behavior, std::move(candidates), params_.theta_m,
                              0.5 * scene_->map.resolution(), params_.impact_radius);
}

double Predictor::divisor(const Pose& human, const RobotInfluence& influence) const {
  double sum = 0.0;
  for (const Vec2& c : influence.candidates) sum += social_force(human, c, params_.social).norm();
  const double own = social_force(human, influence.position, params_.social).norm();
  return legibility_divisor(behaviors_[influence.behavior].legibility_gain, own, sum);
}

Distribution<std::size_t> Predictor::goal_distribution(const HumanContext& ctx,
                                                       const RobotInfluence* influence) const {
  Distribution<std::size_t> d;
  const std::size_t guide = scene_->guide_goal;
  if (params_.guide_goal_only) {
    d.support = {guide};
    d.probs = {1.0};
    return d;
  }
  const double div = influence ? divisor(ctx.pose(), *influence) : 1.0;
  d.support.resize(fields_.size());
  d.probs.resize(fields_.size());
  for (std::size_t g = 0; g < fields_.size(); ++g) {
    const double dv = fields_[g].value(ctx.latest()) - fields_[g].value(ctx.earliest());
    double e = params_.beta_g * dv;
    if (influence && g == guide) e /= div;
    d.support[g] = g;
    d.probs[g] = e;
  }
  normalize_exponents(d.probs, "goal");
  return d;
}

void Predictor::action_weights(Cell s, std::size_t goal, const RobotInfluence* influence, double div,
                               std::span<double> probs) const {
  const mdp::ValueField& field = fields_[goal];
  const GridMap& map = scene_->map;
  const bool at_goal = s == field.goal();
  const double v_s = field.value(s);
  for (std::size_t a = 0; a < actions_->size(); ++a) {
    const Cell next = at_goal ? s : mdp::transition(s, (*actions_)[a], map);
    const double q = mdp::revised_q(s, (*actions_)[a], field, map, mdp_);
    const double base = params_.baseline == AdvantageBaseline::CurrentState ? v_s : field.value(next);
    double e = params_.beta_a * (q - base);
    if (influence && point_in_fan(center_of(next, map), influence->impact_area)) e /= div;
    probs[a] = e;
  }
  normalize_exponents(probs, "action");
}

Distribution<std::size_t> Predictor::action_distribution(Cell s, std::size_t goal, const Pose& human,
                                                         const RobotInfluence* influence) const {
  if (goal >= fields_.size()) throw Error("action_distribution: goal index out of range");
  Distribution<std::size_t> d;
  d.support.resize(actions_->size());
  d.probs.resize(actions_->size());
  for (std::size_t a = 0; a < d.support.size(); ++a) d.support[a] = a;
  action_weights(s, goal, influence, influence ? divisor(human, *influence) : 1.0, d.probs);
  return d;
}

Prediction Predictor::predict_next(const HumanContext& ctx, const RobotInfluence* influence, std::size_t samples,
                                   Rng& rng) const {
  if (samples == 0) throw Error("predict_next: K must be at least 1");
  const GridMap& map = scene_->map;
  const Cell s = ctx.latest();
  const Distribution<std::size_t> goals = goal_distribution(ctx, influence);
  const double div = influence ? divisor(ctx.pose(), *influence) : 1.0;

  const std::size_t n_actions = actions_->size();
  std::vector<double> action_probs(goals.support.size() * n_actions);
  std::vector<unsigned char> ready(goals.support.size(), 0);

  Layer layer;
  layer.total = static_cast<std::uint32_t>(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t gi = sample_index(goals.probs, rng);
    std::span<double> probs(action_probs.data() + gi * n_actions, n_actions);
    if (!ready[gi]) {
      action_weights(s, goals.support[gi], influence, div, probs);
      ready[gi] = 1;
    }
    const std::size_t a = sample_index(probs, rng);
    const Cell next = s == fields_[goals.support[gi]].goal() ? s : mdp::transition(s, (*actions_)[a], map);
    auto it = std::find_if(layer.counts.begin(), layer.counts.end(), [&](const auto& e) { return e.first == next; });
    if (it == layer.counts.end())
      layer.counts.emplace_back(next, 1u);
    else
      ++it->second;
  }
  // Counts commute, so the layer is independent of sample order; sort for a canonical draw.
  std::sort(layer.counts.begin(), layer.counts.end(), [&](const auto& a, const auto& b) {
    return map.index(a.first) < map.index(b.first);
  });
  std::vector<double> freq(layer.counts.size());
  for (std::size_t i = 0; i < freq.size(); ++i) freq[i] = static_cast<double>(layer.counts[i].second) / samples;
  const Cell chosen = layer.counts[sample_index(freq, rng)].first;
  return Prediction{chosen, center_of(chosen, map), std::move(layer)};
}

Prediction Predictor::predict_next(const HumanContext& ctx, const RobotInfluence* influence, std::size_t samples,
                                   std::uint64_t seed) const {
  Rng rng(seed);
  return predict_next(ctx, influence, samples, rng);
}

}  // namespace guide::prediction
