#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guide/sim.hpp"

namespace guide::session {

inline constexpr int kProtocolVersion = 1;

struct SessionOptions {
  sim::Method method = sim::Method::Planner;
  double human_speed = 1.0;        // m/s for a unit-length move intent
  double planner_wall_ms = 300.0;  // per-step search cap
  std::uint64_t seed = 1;
};

/// One client's protocol state. Single-threaded: the caller serializes handle/tick/disconnect.
///
/// Client messages: join, human-move {dx, dy}, reset. Server frames: state-frame, trial-end, error.
/// Every frame carries v and a strictly increasing session timestamp t (seconds).
class Session {
 public:
  Session(const sim::Environment& env, SessionOptions options);
  ~Session();

  std::vector<std::string> handle(std::string_view message);
  /// Advances the active trial one step. Emits nothing when no trial is running.
  std::vector<std::string> tick();
  /// Aborts a running trial.
  void disconnect();

  bool active() const;
  /// True once a trial-end frame has gone out; the session emits nothing afterwards.
  bool ended() const { return ended_; }
  /// Completed and aborted trial logs, oldest first.
  const std::vector<sim::TrialLog>& finished() const { return finished_; }

 private:
  struct Running;

  std::string error_frame(std::string_view message);
  std::string state_frame(bool include_scene);
  std::string end_frame();
  void start_trial();
  void retire(bool aborted);
  double stamp();

  const sim::Environment& env_;
  SessionOptions options_;
  std::unique_ptr<Running> run_;
  std::vector<sim::TrialLog> finished_;
  std::uint64_t trials_started_ = 0;
  std::uint64_t seq_ = 0;
  double last_t_ = -1.0;
  bool ended_ = false;
  std::chrono::steady_clock::time_point origin_;
};

}  // namespace guide::session
