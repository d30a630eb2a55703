#include "guide/session.hpp"

#include <cmath>

#include <json.hpp>

namespace guide::session {

using nlohmann::json;

struct Session::Running {
  sim::InteractiveAgent agent;
  sim::Trial trial;

  Running(const sim::Environment& env, const SessionOptions& o, std::uint64_t seed)
      : agent(o.human_speed), trial(env, o.method, agent, seed) {}
};

Session::Session(const sim::Environment& env, SessionOptions options)
    : env_(env), options_(options), origin_(std::chrono::steady_clock::now()) {
  if (!(options_.human_speed > 0.0)) throw Error("session: human speed must be positive");
}

Session::~Session() = default;

bool Session::active() const { return run_ && !run_->trial.done(); }

double Session::stamp() {
  const double now = std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
  last_t_ = now > last_t_ ? now : std::nextafter(last_t_, INFINITY);
  return last_t_;
}

namespace {

json point(const Vec2& p) { return json::array({p.x(), p.y()}); }

json metrics_json(const sim::Metrics& m) {
  return {{"success", m.success},
          {"ambiguity_ratio", m.ambiguity_ratio},
          {"discomfort_ratio_p", m.discomfort_ratio_p},
          {"discomfort_ratio_i", m.discomfort_ratio_i}};
}

}  // namespace

std::string Session::error_frame(std::string_view message) {
  return json{{"v", kProtocolVersion}, {"type", "error"}, {"t", stamp()}, {"seq", seq_++}, {"message", message}}
      .dump();
}

std::string Session::state_frame(bool include_scene) {
  const sim::Trial& trial = run_->trial;
  const GridMap& map = env_.scene().map;
  json layer = nullptr;
  if (trial.layer()) layer = {{"width", map.width()}, {"height", map.height()}, {"cells", trial.layer()->dense(map)}};
  json frame{{"v", kProtocolVersion},
             {"type", "state-frame"},
             {"t", stamp()},
             {"seq", seq_++},
             {"trial", trials_started_},
             {"trial_time", trial.log().steps.back().time},
             {"human", point(trial.human().pose().position)},
             {"robot", point(trial.robot())},
             {"behavior", prediction::to_string(trial.behavior())},
             {"layer", layer},
             {"metrics", metrics_json(sim::compute_metrics(trial.log()))}};
  if (include_scene) frame["scene"] = scene_to_json(env_.scene());
  return frame.dump();
}

std::string Session::end_frame() {
  const sim::TrialLog& log = run_->trial.log();
  const sim::Metrics m = sim::compute_metrics(log);
  return json{{"v", kProtocolVersion},
              {"type", "trial-end"},
              {"t", stamp()},
              {"seq", seq_++},
              {"trial", trials_started_},
              {"success", m.success},
              {"outcome", sim::to_string(log.outcome)},
              {"metrics", metrics_json(m)}}
      .dump();
}

void Session::start_trial() {
  ++trials_started_;
  run_ = std::make_unique<Running>(env_, options_, options_.seed + trials_started_ - 1);
  planner::PlannerParams p = env_.config().planner;
  p.wall_ms = options_.planner_wall_ms;
  run_->trial.set_planner(p);
  run_->trial.record_layers(true);
}

void Session::retire(bool aborted) {
  if (!run_) return;
  if (aborted) run_->trial.abort();
  finished_.push_back(run_->trial.log());
  run_.reset();
  if (!aborted) ended_ = true;
}

std::vector<std::string> Session::handle(std::string_view message) {
  if (ended_) return {};
  const json msg = json::parse(message.begin(), message.end(), nullptr, false);
  if (msg.is_discarded() || !msg.is_object()) return {error_frame("malformed message: expected a JSON object")};
  if (!msg.contains("v") || msg["v"] != kProtocolVersion) return {error_frame("unsupported protocol version")};
  if (!msg.contains("type") || !msg["type"].is_string()) return {error_frame("malformed message: missing type")};
  const std::string type = msg["type"].get<std::string>();

  std::vector<std::string> out;
  if (type == "join") {
    if (run_) return {error_frame("already joined")};
    start_trial();
    out.push_back(state_frame(true));
    if (run_->trial.done()) {
      out.push_back(end_frame());
      retire(false);
    }
  } else if (type == "reset") {
    if (!run_ && trials_started_ == 0) return {error_frame("reset before join")};
    retire(true);
    start_trial();
    out.push_back(state_frame(true));
    if (run_->trial.done()) {
      out.push_back(end_frame());
      retire(false);
    }
  } else if (type == "human-move") {
    if (!run_) return {error_frame("no active trial")};
    const auto dx = msg.find("dx");
    const auto dy = msg.find("dy");
    if (dx == msg.end() || dy == msg.end() || !dx->is_number() || !dy->is_number())
      return {error_frame("human-move needs numeric dx and dy")};
    const Vec2 dir(dx->get<double>(), dy->get<double>());
    if (!dir.allFinite()) return {error_frame("human-move needs finite dx and dy")};
    run_->agent.push_intent(dir);
  } else {
    return {error_frame("unknown message type '" + type + "'")};
  }
  return out;
}

std::vector<std::string> Session::tick() {
  if (ended_ || !active()) return {};
  run_->trial.step();
  std::vector<std::string> out{state_frame(false)};
  if (run_->trial.done()) {
    out.push_back(end_frame());
    retire(false);
  }
  return out;
}

void Session::disconnect() { retire(true); }

}  // namespace guide::session
