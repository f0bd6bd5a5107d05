#include "sharedctl/assist.hpp"

#include <algorithm>

namespace sharedctl {

namespace {

std::size_t best_state_in_class(const Belief& belief, const Scenario& scenario, std::size_t goal) {
  const std::size_t first = scenario.class_begin(goal);
  std::size_t best = first;
  for (std::size_t x = first + 1; x < first + scenario.class_size(goal); ++x) {
    if (belief.probs[static_cast<Eigen::Index>(x)] > belief.probs[static_cast<Eigen::Index>(best)]) {
      best = x;
    }
  }
  return best;
}

Action continuous_assist(const Pose& s, const Pose& target, const WorldModel& world) {
  Action u;
  const Vec3 delta = target.position - s.position;
  const double gap = delta.norm();
  if (gap > 0.0) {
    u.linear = gap <= world.limits.linear * world.dt ? Vec3(delta / world.dt)
                                                      : Vec3(delta * (world.limits.linear / gap));
  }
  Quat error = target.orientation * s.orientation.conjugate();
  if (error.w() < 0.0) error.coeffs() *= -1.0;
  const Eigen::AngleAxisd rotation(error);
  if (rotation.angle() > 0.0) {
    u.angular = rotation.axis() * std::min(world.limits.angular, rotation.angle() / world.dt);
  }
  return clamped(u, world.limits);
}

Action discrete_assist(const Pose& s, const Pose& target, const WorldModel& world,
                       ControlMode mode, bool full_axes) {
  std::vector<Action> candidates;
  if (full_axes) {
    const CanonicalActions linear = world.actions(ControlMode::Position);
    const CanonicalActions angular = world.actions(ControlMode::Angular);
    candidates.assign(linear.begin(), linear.end());
    candidates.insert(candidates.end(), angular.begin() + 1, angular.end());
  } else {
    const CanonicalActions set = world.actions(mode);
    candidates.assign(set.begin(), set.end());
  }
  std::size_t best = 0;
  double best_distance = world.distance(world.step(s, candidates[0]), target);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double d = world.distance(world.step(s, candidates[i]), target);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return candidates[best];
}

}  // namespace

EngagementState update_engagement(const EngagementState& state, const GoalPosterior& posterior,
                                  const Belief& belief, const Scenario& scenario,
                                  const EngagementConfig& config) {
  EngagementState next = state;
  if (next.engaged &&
      posterior.probs[static_cast<Eigen::Index>(next.engaged->goal)] <=
          config.threshold - config.hysteresis) {
    next = EngagementState{};
  }
  if (!next.engaged) {
    const std::size_t goal = posterior.argmax();
    if (posterior.probs[static_cast<Eigen::Index>(goal)] > config.threshold) {
      next.engaged = EngagedTarget{goal, best_state_in_class(belief, scenario, goal)};
      next.next_keypoint = 0;
    }
    return next;
  }
  const std::size_t best = best_state_in_class(belief, scenario, next.engaged->goal);
  if (best != next.engaged->state) {
    next.engaged->state = best;
    next.next_keypoint = 0;
  }
  return next;
}

EngagementState advance_keypoint(const EngagementState& state, const Pose& s, const Grasp& grasp,
                                 Tolerance tolerance) {
  EngagementState next = state;
  while (next.next_keypoint + 1 < grasp.keypoints.size() &&
         within(s, grasp.keypoints[next.next_keypoint], tolerance)) {
    ++next.next_keypoint;
  }
  return next;
}

Action assist_action(const Pose& s, const EngagementState& state, const Scenario& scenario,
                     const WorldModel& world, ControlMode mode, const AssistOptions& options) {
  if (!state.engaged) return Action{};
  const Grasp& grasp = scenario.grasp(state.engaged->state);
  const Pose& target = grasp.keypoints.at(state.next_keypoint);
  const Action u = options.discrete ? discrete_assist(s, target, world, mode, options.full_axes)
                                    : continuous_assist(s, target, world);
  return options.full_axes ? u : restricted_to(u, mode);
}

std::vector<Pose> remaining_keypoints(const EngagementState& state, const Scenario& scenario) {
  if (!state.engaged) return {};
  const auto& kps = scenario.grasp(state.engaged->state).keypoints;
  return {kps.begin() + static_cast<std::ptrdiff_t>(state.next_keypoint), kps.end()};
}

}  // namespace sharedctl
