#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sharedctl/rng.hpp"
#include "sharedctl/scenario.hpp"
#include "sharedctl/workspace.hpp"

namespace sharedctl {

/// A simulated operator: Boltzmann-rational toward one intended grasp, and
/// inclined to let go of the controls while the robot is making progress.
struct OperatorConfig {
  std::string intended_grasp_id;
  double beta_op = 5.0;
  double p_idle_when_helped = 0.0;
  std::optional<std::uint64_t> goal_switch_tick;
  std::optional<std::string> switched_grasp_id;
  std::uint64_t seed = 0;

  /// Throws ConfigError, including for ids the scenario does not define.
  void validate(const Scenario& scenario) const;
};

struct OperatorState {
  Rng rng;
  std::size_t intent = 0;    // grasp state index
  std::size_t keypoint = 0;  // the operator's own progress along its intended grasp

  OperatorState(const OperatorConfig& config, const Scenario& scenario);
};

/// One tick of operator input. If the last executed command is carrying the end
/// effector closer to the intended grasp's current keypoint, idles with
/// probability p_idle_when_helped; otherwise samples a canonical action of
/// the given mode from the Boltzmann distribution toward the intended grasp pose.
Action operator_act(OperatorState& state, const Pose& s, const Action& last_u_star,
                    const Scenario& scenario, const WorldModel& world,
                    const OperatorConfig& config, ControlMode mode, std::uint64_t tick);

/// Position mode while the position error to the intended grasp exceeds
/// 3 * tol.position. Inside that radius, angular mode while the orientation
/// error is at least half of tol.rotation, then back to position mode for the
/// final approach.
ControlMode mode_policy(const OperatorState& state, const Pose& s, const Scenario& scenario,
                        Tolerance tol = kGraspTolerance);

}  // namespace sharedctl
