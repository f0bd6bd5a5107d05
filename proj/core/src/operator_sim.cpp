#include "sharedctl/operator_sim.hpp"

#include <array>

#include "sharedctl/errors.hpp"
#include "sharedctl/inference.hpp"

namespace sharedctl {

void OperatorConfig::validate(const Scenario& scenario) const {
  if (!(beta_op >= 0.0)) throw ConfigError("operator beta_op must be >= 0");
  if (!(p_idle_when_helped >= 0.0 && p_idle_when_helped <= 1.0)) {
    throw ConfigError("operator p_idle_when_helped must lie in [0, 1]");
  }
  if (goal_switch_tick.has_value() != switched_grasp_id.has_value()) {
    throw ConfigError("goal_switch_tick and switched_grasp_id must be given together");
  }
  scenario.state_index(intended_grasp_id);
  if (switched_grasp_id) scenario.state_index(*switched_grasp_id);
}

OperatorState::OperatorState(const OperatorConfig& config, const Scenario& scenario)
    : rng(config.seed), intent(scenario.state_index(config.intended_grasp_id)) {}

Action operator_act(OperatorState& state, const Pose& s, const Action& last_u_star,
                    const Scenario& scenario, const WorldModel& world,
                    const OperatorConfig& config, ControlMode mode, std::uint64_t tick) {
  if (config.goal_switch_tick && tick == *config.goal_switch_tick) {
    state.intent = scenario.state_index(*config.switched_grasp_id);
    state.keypoint = 0;
  }
  const Grasp& grasp = scenario.grasp(state.intent);
  while (state.keypoint + 1 < grasp.keypoints.size() &&
         within(s, grasp.keypoints[state.keypoint], kKeypointTolerance)) {
    ++state.keypoint;
  }

  if (reward(world, s, last_u_star, grasp.keypoints[state.keypoint]) > 0.0 &&
      state.rng.uniform() < config.p_idle_when_helped) {
    return Action{};
  }

  const CanonicalActions actions = world.actions(mode);
  const double unit = reward_unit(world, actions);
  std::array<double, kCanonicalActionCount> rewards{};
  for (std::size_t i = 0; i < actions.size(); ++i) {
    rewards[i] = reward(world, s, actions[i], grasp.grasp_pose()) / unit;
  }
  const std::vector<double> probs = boltzmann(rewards, config.beta_op);
  return actions[state.rng.categorical(probs)];
}

ControlMode mode_policy(const OperatorState& state, const Pose& s, const Scenario& scenario,
                        Tolerance tol) {
  const Pose& target = scenario.grasp(state.intent).grasp_pose();
  if ((s.position - target.position).norm() > 3.0 * tol.position) return ControlMode::Position;
  return geodesic_angle(s.orientation, target.orientation) >= 0.5 * tol.rotation
             ? ControlMode::Angular
             : ControlMode::Position;
}

}  // namespace sharedctl
