#include "sharedctl/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sharedctl/errors.hpp"

namespace sharedctl {

namespace {

constexpr double kUnderflow = 1e-300;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void HmmParams::validate() const {
  if (!is_probability(t_grasp) || !is_probability(t_goal)) {
    throw InvalidParams("t_grasp and t_goal must lie in [0, 1]");
  }
  if (t_grasp + t_goal > 1.0) throw InvalidParams("t_grasp + t_goal must not exceed 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidParams("beta must be finite and >= 0");
}

Belief Belief::uniform(std::size_t states) {
  return Belief{Eigen::VectorXd::Constant(static_cast<Eigen::Index>(states),
                                          1.0 / static_cast<double>(states))};
}

std::size_t GoalPosterior::argmax() const {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

TransitionMatrix build_transition_matrix(std::span<const std::size_t> class_sizes,
                                         const HmmParams& params) {
  params.validate();
  const std::size_t goals = class_sizes.size();
  const std::size_t states = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});
  if (states == 0) throw InvalidParams("transition model needs at least one grasp state");
  if (std::find(class_sizes.begin(), class_sizes.end(), 0u) != class_sizes.end()) {
    throw InvalidParams("every goal needs at least one grasp state");
  }

  std::vector<std::size_t> begin(goals);
  std::exclusive_scan(class_sizes.begin(), class_sizes.end(), begin.begin(), std::size_t{0});

  const auto n = static_cast<Eigen::Index>(states);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t g = 0; g < goals; ++g) {
    const std::size_t size = class_sizes[g];
    double stay = 1.0 - (params.t_grasp + params.t_goal);
    double within = params.t_grasp;
    double across = params.t_goal;
    if (goals == 1) {
      within += across;
      across = 0.0;
    }
    if (size == 1) {
      stay += within;
      within = 0.0;
    }
    for (std::size_t i = begin[g]; i < begin[g] + size; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      for (std::size_t j = begin[g]; j < begin[g] + size; ++j) {
        m(row, static_cast<Eigen::Index>(j)) =
            (i == j) ? stay : within / static_cast<double>(size - 1);
      }
      if (across == 0.0) continue;
      for (std::size_t h = 0; h < goals; ++h) {
        if (h == g) continue;
        const double each = across / static_cast<double>(goals - 1) /
                            static_cast<double>(class_sizes[h]);
        for (std::size_t j = begin[h]; j < begin[h] + class_sizes[h]; ++j) {
          m(row, static_cast<Eigen::Index>(j)) = each;
        }
      }
    }
  }
  return TransitionMatrix(std::move(m));
}

TransitionMatrix build_transition_matrix(const Scenario& scenario, const HmmParams& params) {
  const std::vector<std::size_t> sizes = scenario.class_sizes();
  return build_transition_matrix(sizes, params);
}

double reward(const WorldModel& world, const Pose& s, const Action& u, const Pose& target) {
  return world.distance(s, target) - world.distance(world.step(s, u), target);
}

double reward_unit(const WorldModel& world, std::span<const Action> actions) {
  double unit = 0.0;
  for (const Action& u : actions) {
    unit = std::max(unit, (u.linear.norm() + world.rotation_weight * u.angular.norm()) * world.dt);
  }
  return unit > 0.0 ? unit : 1.0;
}

std::vector<double> boltzmann(std::span<const double> rewards, double beta) {
  std::vector<double> out(rewards.size());
  if (rewards.empty()) return out;
  const double top = beta * *std::max_element(rewards.begin(), rewards.end());
  double total = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i] = std::exp(beta * rewards[i] - top);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

namespace {

std::size_t index_in(std::span<const Action> actions, const Action& u) {
  const auto it = std::find(actions.begin(), actions.end(), u);
  if (it == actions.end()) {
    throw ActionNotInSet("observed action is not in the observation model's action set");
  }
  return static_cast<std::size_t>(it - actions.begin());
}

// Likelihood of actions[index] toward target, with successor poses precomputed.
double likelihood_at(const WorldModel& world, const Pose& s, std::span<const Pose> successors,
                     std::size_t index, const Pose& target, double beta, double unit) {
  const double here = world.distance(s, target);
  std::vector<double> rewards(successors.size());
  for (std::size_t i = 0; i < successors.size(); ++i) {
    rewards[i] = (here - world.distance(successors[i], target)) / unit;
  }
  return boltzmann(rewards, beta)[index];
}

std::vector<Pose> successors_of(const WorldModel& world, const Pose& s,
                                std::span<const Action> actions) {
  std::vector<Pose> out;
  out.reserve(actions.size());
  for (const Action& u : actions) out.push_back(world.step(s, u));
  return out;
}

}  // namespace

double observation_likelihood(const WorldModel& world, const Pose& s, const Action& u_h,
                              const Pose& target, std::span<const Action> actions, double beta,
                              bool normalize_reward) {
  const std::size_t index = index_in(actions, u_h);
  const double unit = normalize_reward ? reward_unit(world, actions) : 1.0;
  const std::vector<Pose> next = successors_of(world, s, actions);
  return likelihood_at(world, s, next, index, target, beta, unit);
}

Eigen::VectorXd observation_likelihoods(const Scenario& scenario, const WorldModel& world,
                                        const Pose& s, const Action& u_h, ControlMode mode,
                                        const HmmParams& params) {
  const CanonicalActions actions = world.actions(mode);
  const std::size_t index = index_in(actions, u_h);
  const double unit = params.normalize_reward ? reward_unit(world, actions) : 1.0;
  const std::vector<Pose> next = successors_of(world, s, actions);
  Eigen::VectorXd out(static_cast<Eigen::Index>(scenario.state_count()));
  for (std::size_t x = 0; x < scenario.state_count(); ++x) {
    out[static_cast<Eigen::Index>(x)] =
        likelihood_at(world, s, next, index, scenario.grasp(x).grasp_pose(), params.beta, unit);
  }
  return out;
}

Belief transition_step(const Belief& belief, const TransitionMatrix& transitions) {
  return Belief{transitions.matrix().transpose() * belief.probs};
}

Belief forward_update(const Belief& belief, const Eigen::VectorXd& likelihoods,
                      const TransitionMatrix& transitions) {
  Eigen::VectorXd next = likelihoods.cwiseProduct(transitions.matrix().transpose() * belief.probs);
  const double total = next.sum();
  if (!(total >= kUnderflow)) {
    throw DegenerateBelief("forward update normalizer underflowed (" + std::to_string(total) + ")");
  }
  next /= total;
  return Belief{std::move(next)};
}

Belief forward_update(const Belief& belief, const Action& u_h, ControlMode mode, const Pose& s,
                      const TransitionMatrix& transitions, const Scenario& scenario,
                      const WorldModel& world, const HmmParams& params) {
  return forward_update(belief, observation_likelihoods(scenario, world, s, u_h, mode, params),
                        transitions);
}

GoalPosterior goal_posterior(const Belief& belief, const Scenario& scenario) {
  Eigen::VectorXd goals = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scenario.goal_count()));
  for (std::size_t x = 0; x < scenario.state_count(); ++x) {
    goals[static_cast<Eigen::Index>(scenario.goal_of(x))] += belief.probs[static_cast<Eigen::Index>(x)];
  }
  return GoalPosterior{std::move(goals)};
}

}  // namespace sharedctl
