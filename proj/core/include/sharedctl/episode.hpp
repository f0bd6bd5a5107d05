#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharedctl/arbitration.hpp"
#include "sharedctl/assist.hpp"
#include "sharedctl/inference.hpp"
#include "sharedctl/operator_sim.hpp"
#include "sharedctl/scenario.hpp"

namespace sharedctl {

/// Everything that determines the shared-control dynamics of one episode.
struct LoopConfig {
  ControllerConfig controller;
  HmmParams hmm;
  double rotation_weight = kDefaultRotationWeight;
  ActionLimits limits;
  std::uint64_t max_ticks = 2400;  // 120 s at 20 Hz
  Tolerance success_tolerance = kGraspTolerance;

  void validate() const;
};

/// Everything that happened on one tick. `pose` is the pose after u_star.
struct TickRecord {
  std::uint64_t tick = 0;
  ControlMode mode = ControlMode::Position;
  double alpha = 0.0;  // arbitration in effect (live sessions may change it)
  Action u_h_raw;
  Action u_h_snapped;
  Action u_r;
  Action u_star;
  Pose pose;
  Belief belief;
  GoalPosterior posterior;
  EngagementState engagement;
};

enum class OutcomeKind { Success, Timeout, Skipped };

std::string_view to_string(OutcomeKind kind);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Timeout;
  std::string grasp_id;  // grasp that succeeded (Success only)
  std::uint64_t ticks = 0;
};

struct EpisodeHeader {
  nlohmann::json scenario;  // full scenario, so a log replays on its own
  std::string scenario_id;
  std::string target_goal_id;
  LoopConfig loop;
  std::string operator_name;
  std::optional<OperatorConfig> operator_config;
  std::uint64_t seed = 0;
  std::uint32_t repetition = 0;
  std::uint32_t attempt = 0;
  std::string code_version;
  std::string rng_algorithm;
};

struct EpisodeLog {
  EpisodeHeader header;
  std::vector<TickRecord> records;
  Outcome outcome;
};

/// The per-tick shared-control pipeline, shared by batch episodes and live
/// sessions: snap input, filter on non-idle input, update engagement and
/// keypoints, compute u_r, blend, move, check success / timeout.
class SharedControlLoop {
 public:
  SharedControlLoop(Scenario scenario, LoopConfig config, std::size_t target_goal);

  /// Advances one tick. The raw input is restricted to the mode's axes and
  /// clamped to the action limits before use. Throws SessionClosed once finished.
  const TickRecord& step(const Action& u_h_raw, ControlMode mode);

  bool finished() const { return outcome_.has_value(); }
  const std::optional<Outcome>& outcome() const { return outcome_; }

  const Scenario& scenario() const { return scenario_; }
  const WorldModel& world() const { return world_; }
  const LoopConfig& config() const { return config_; }
  std::size_t target_goal() const { return target_goal_; }
  std::uint64_t tick() const { return tick_; }
  const Pose& pose() const { return pose_; }
  const Belief& belief() const { return belief_; }
  const GoalPosterior& posterior() const { return posterior_; }
  const EngagementState& engagement() const { return engagement_; }
  const Action& last_u_star() const { return last_u_star_; }
  const std::vector<TickRecord>& records() const { return records_; }

  /// Takes effect from the next tick.
  void set_alpha(double alpha);

 private:
  Scenario scenario_;
  LoopConfig config_;
  WorldModel world_;
  TransitionMatrix transitions_;
  std::size_t target_goal_;
  std::uint64_t tick_ = 0;
  Pose pose_;
  Belief belief_;
  GoalPosterior posterior_;
  EngagementState engagement_;
  Action last_u_star_;
  std::vector<TickRecord> records_;
  std::optional<Outcome> outcome_;
};

/// One tick of scripted input.
struct ScriptedInput {
  Action u_h_raw;
  ControlMode mode = ControlMode::Position;
  std::optional<double> alpha;  // switch arbitration before this tick
};

struct EpisodeOptions {
  std::string operator_name = "operator";
  std::uint32_t repetition = 0;
  std::uint32_t attempt = 0;
  /// Goal whose grasps count as success; defaults to the goal of the
  /// operator's final intent.
  std::optional<std::string> target_goal_id;
};

/// Header fields common to every episode kind.
EpisodeHeader make_header(const Scenario& scenario, const LoopConfig& config,
                          std::size_t target_goal, const EpisodeOptions& options);

/// Runs a simulated operator to success or timeout. Deterministic in seed.
EpisodeLog run_episode(const Scenario& scenario, const LoopConfig& config,
                       OperatorConfig operator_config, std::uint64_t seed,
                       const EpisodeOptions& options = {});

/// Feeds a fixed input stream until success or timeout. Once the script is
/// exhausted the operator is idle (null input, last mode).
EpisodeLog run_scripted_episode(const Scenario& scenario, const LoopConfig& config,
                                std::size_t target_goal, std::span<const ScriptedInput> script,
                                const EpisodeOptions& options = {});

/// Extracts the (u_h_raw, mode, alpha) stream of a log.
std::vector<ScriptedInput> input_stream(const EpisodeLog& log);

struct ReplayReport {
  bool identical = true;
  std::optional<std::uint64_t> first_mismatch_tick;
  std::string detail;
};

/// Re-runs the header and recorded raw input stream and compares every
/// derived field bit-for-bit. When the header carries an operator config the
/// operator is re-simulated from its seed as well.
ReplayReport replay(const EpisodeLog& log);

}  // namespace sharedctl
