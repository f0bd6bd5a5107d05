#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharedctl/episode.hpp"

namespace sharedctl {

enum class VisualizationCondition { None, GoalOnly, GoalPlusTrajectory };

std::string_view to_string(VisualizationCondition condition);
/// Accepts "None", "GoalOnly", "GoalPlusTrajectory". Throws ProtocolError.
VisualizationCondition parse_visualization_condition(std::string_view name);

struct GoalSphere {
  std::string goal_id;
  Vec3 centroid = Vec3::Zero();
  double radius = 0.0;
};

/// What the operator is shown about the assistive controller's intent.
struct VisualizationPayload {
  std::optional<GoalSphere> goal_sphere;  // engaged and condition != None
  std::vector<Pose> ghost_keypoints;      // unreached keypoints, GoalPlusTrajectory only
};

inline constexpr double kSphereMargin = 0.05;  // m

/// Bounding radius of the goal's keypoints around its centroid, plus a margin.
double goal_sphere_radius(const Goal& goal, double margin = kSphereMargin);

VisualizationPayload visualization_payload(VisualizationCondition condition,
                                           const EngagementState& engagement,
                                           const Scenario& scenario);

/// Latched operator input for one tick: axes in [-1, 1]^3 on the active mode.
struct ControlInput {
  Vec3 axes = Vec3::Zero();
  bool toggle_mode = false;
};

struct SessionConfig {
  LoopConfig loop;
  VisualizationCondition condition = VisualizationCondition::None;
  std::uint32_t max_failures_per_object = 4;
  ControlMode initial_mode = ControlMode::Position;
};

struct SessionMetrics {
  std::uint64_t ticks = 0;
  std::uint64_t input_ticks = 0;  // completion effort so far
  double acceptance = 0.0;        // percent of ticks without input
};

/// Everything a client needs to draw one frame.
struct StateUpdate {
  std::uint64_t tick = 0;          // session clock
  std::uint64_t episode_tick = 0;  // ticks into the current episode
  bool episode_active = false;
  bool round_complete = false;
  std::string instructed_goal_id;
  std::string instructed_label;
  std::uint32_t attempt = 0;
  ControlMode mode = ControlMode::Position;
  double alpha = 0.0;
  VisualizationCondition condition = VisualizationCondition::None;
  Pose pose;
  Belief belief;
  GoalPosterior posterior;
  EngagementState engagement;
  Action u_h;
  Action u_r;
  Action u_star;
  VisualizationPayload visualization;
  SessionMetrics metrics;
  std::optional<Outcome> outcome;  // set on the tick that ends the episode
};

/// A live shared-control session over one round: the same per-tick loop as
/// batch episodes, with human input in place of the simulated operator. The
/// session has a single owner; nothing here is synchronized.
class Session {
 public:
  Session(Scenario scenario, SessionConfig config);

  /// One tick with the given input. Throws SessionClosed when no episode is running.
  StateUpdate tick(const ControlInput& input);
  /// One tick with the latched input (most recent wins); toggles received
  /// since the last tick are applied, then the latch is cleared of toggles.
  StateUpdate tick();

  /// Applies one client message and returns any direct replies (Error,
  /// EpisodeLog). Control input is latched for the next tick. Malformed
  /// messages produce an Error reply; the session is unaffected.
  std::vector<nlohmann::json> handle_client_message(std::string_view text);

  /// Current state without advancing the clock.
  StateUpdate snapshot() const;

  bool episode_active() const { return loop_ && !loop_->finished(); }
  bool round_complete() const { return round_complete_; }
  std::uint64_t clock() const { return clock_; }
  ControlMode mode() const { return mode_; }
  double alpha() const { return config_.loop.controller.alpha; }
  VisualizationCondition condition() const { return config_.condition; }
  const Scenario& scenario() const { return scenario_; }
  std::size_t instructed_goal() const { return goal_index_; }

  void set_alpha(double alpha);
  void set_condition(VisualizationCondition condition) { config_.condition = condition; }
  void set_mode(ControlMode mode) { mode_ = mode; }
  /// Moves on after an episode ends: retries the same object after a timeout
  /// until it has failed max_failures_per_object times, otherwise advances.
  void next_object();
  void restart_round();

  /// The running or most recently finished episode, as a log.
  EpisodeLog current_log() const;
  const std::vector<EpisodeLog>& completed_logs() const { return completed_; }

 private:
  void start_episode();
  StateUpdate make_update(const TickRecord* record) const;

  Scenario scenario_;
  SessionConfig config_;
  std::optional<SharedControlLoop> loop_;
  EpisodeHeader header_;
  std::size_t goal_index_ = 0;
  std::uint32_t attempt_ = 0;
  std::uint32_t failures_ = 0;
  bool round_complete_ = false;
  std::uint64_t clock_ = 0;  // session-wide, monotonic across episodes
  ControlMode mode_;
  ControlInput latched_;
  std::uint32_t pending_toggles_ = 0;
  std::vector<EpisodeLog> completed_;
};

// Wire encodings. Every message carries "type" and "tick".
nlohmann::json state_update_message(const StateUpdate& update, const Scenario& scenario);
nlohmann::json episode_end_message(const StateUpdate& update);
nlohmann::json error_message(std::uint64_t tick, std::string_view message);

/// Converts a ControlInput stream into the raw-action stream the batch runner
/// consumes, tracking mode toggles from the initial mode.
std::vector<ScriptedInput> script_from_inputs(std::span<const ControlInput> inputs,
                                              ControlMode initial_mode,
                                              const ActionLimits& limits);

}  // namespace sharedctl
