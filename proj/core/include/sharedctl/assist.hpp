#pragma once

#include <cstddef>
#include <optional>

#include "sharedctl/inference.hpp"
#include "sharedctl/scenario.hpp"
#include "sharedctl/workspace.hpp"

namespace sharedctl {

struct EngagementConfig {
  double threshold = 0.5;   // engage when a goal's posterior is strictly above this
  double hysteresis = 0.0;  // disengage at or below threshold - hysteresis
  Tolerance keypoint_tolerance = kKeypointTolerance;
};

/// The grasp the assistive controller is currently driving toward.
struct EngagedTarget {
  std::size_t goal = 0;
  std::size_t state = 0;  // grasp state index in the scenario

  friend bool operator==(const EngagedTarget&, const EngagedTarget&) = default;
};

struct EngagementState {
  std::optional<EngagedTarget> engaged;
  std::size_t next_keypoint = 0;

  bool is_engaged() const { return engaged.has_value(); }
  friend bool operator==(const EngagementState&, const EngagementState&) = default;
};

/// Re-evaluates engagement against the current posterior. A goal that drops to
/// threshold - hysteresis is released and the argmax goal is reconsidered in
/// the same call, so the result is a fixed point for a fixed posterior.
/// Within the engaged goal the most probable grasp is targeted; changing grasp
/// restarts keypoint sequencing.
EngagementState update_engagement(const EngagementState& state, const GoalPosterior& posterior,
                                  const Belief& belief, const Scenario& scenario,
                                  const EngagementConfig& config = {});

/// Advances past every keypoint s is already within tolerance of, stopping at
/// the final keypoint. Never moves backwards.
EngagementState advance_keypoint(const EngagementState& state, const Pose& s, const Grasp& grasp,
                                 Tolerance tolerance = kKeypointTolerance);

struct AssistOptions {
  /// Pick the best canonical action instead of the continuous descent direction.
  bool discrete = false;
  /// Allow u_r on all six axes; otherwise only on the active mode's axes.
  bool full_axes = true;
};

/// The assistive command u_r. Null when disengaged. Otherwise heads for the
/// current keypoint at full speed, slowing to land exactly on it once it is
/// within one tick.
Action assist_action(const Pose& s, const EngagementState& state, const Scenario& scenario,
                     const WorldModel& world, ControlMode mode, const AssistOptions& options = {});

/// The keypoints not yet reached by the engaged grasp (empty when disengaged).
std::vector<Pose> remaining_keypoints(const EngagementState& state, const Scenario& scenario);

}  // namespace sharedctl
